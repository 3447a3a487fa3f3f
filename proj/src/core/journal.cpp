#include "journal.hpp"

namespace trs {

using nlohmann::json;

namespace {

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return std::nullopt;
  }
  return it->get<T>();
}

json nullable(const std::optional<Timestamp>& t) {
  return t ? json(*t) : json(nullptr);
}

}  // namespace

bool ChangeRecord::closes_transaction() const {
  const auto* s = std::get_if<SessionChange>(&change);
  return s != nullptr && txn && *txn == s->session.session_id;
}

std::string_view kind_of(const Change& change) {
  return std::visit(
      [](const auto& c) -> std::string_view {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UserChange>) {
          return "user";
        } else if constexpr (std::is_same_v<T, FeedbackChange>) {
          return "feedback";
        } else if constexpr (std::is_same_v<T, VoteChange>) {
          return "vote";
        } else if constexpr (std::is_same_v<T, AggregateChange>) {
          return "aggregate";
        } else if constexpr (std::is_same_v<T, SessionChange>) {
          return "session";
        } else {
          return "blacklist";
        }
      },
      change);
}

json to_json(const UserRecord& user) {
  return {{"user_id", user.user_id},
          {"trust_degree", user.trust_degree},
          {"blacklist_until", nullable(user.blacklist_until)},
          {"created_at", user.created_at}};
}

json to_json(const FeedbackRecord& f) {
  return {{"feedback_id", f.feedback_id},
          {"product_id", f.product_id},
          {"author_id", f.author_id},
          {"text", f.text},
          {"category", to_string(f.category)},
          {"trustworthiness", f.trustworthiness},
          {"created_at", f.created_at},
          {"appreciation", f.appreciation}};
}

json to_json(const ProductAggregate& a) {
  return {{"product_id", a.product_id},
          {"weighted_sum", a.weighted_sum},
          {"coefficient_sum", a.coefficient_sum},
          {"rating_count", a.rating_count}};
}

json to_json(const Vote& v) {
  return {{"user_id", v.user_id},
          {"feedback_id", v.feedback_id},
          {"choice", to_string(v.choice)},
          {"cast_at", v.cast_at},
          {"override", v.override}};
}

json to_json(const ReviewSession& s) {
  json votes = json::array();
  for (const auto& v : s.votes) {
    votes.push_back(to_json(v));
  }
  return {{"session_id", s.session_id},
          {"user_id", s.user_id},
          {"product_id", s.product_id},
          {"appreciation", s.appreciation},
          {"text", s.text},
          {"selection", s.selection},
          {"votes", std::move(votes)},
          {"state", to_string(s.state)},
          {"thin", s.thin},
          {"submitted_at", s.submitted_at}};
}

UserRecord user_from_json(const json& j) {
  UserRecord u;
  u.user_id = j.at("user_id").get<std::string>();
  u.trust_degree = j.at("trust_degree").get<double>();
  u.blacklist_until = optional_field<Timestamp>(j, "blacklist_until");
  u.created_at = j.at("created_at").get<Timestamp>();
  return u;
}

FeedbackRecord feedback_from_json(const json& j) {
  FeedbackRecord f;
  f.feedback_id = j.at("feedback_id").get<std::string>();
  f.product_id = j.at("product_id").get<std::string>();
  f.author_id = j.at("author_id").get<std::string>();
  f.text = j.at("text").get<std::string>();
  f.category = parse_category(j.at("category").get<std::string>());
  f.trustworthiness = j.at("trustworthiness").get<double>();
  f.created_at = j.at("created_at").get<Timestamp>();
  f.appreciation = j.at("appreciation").get<double>();
  return f;
}

ProductAggregate aggregate_from_json(const json& j) {
  ProductAggregate a;
  a.product_id = j.at("product_id").get<std::string>();
  a.weighted_sum = j.at("weighted_sum").get<double>();
  a.coefficient_sum = j.at("coefficient_sum").get<double>();
  a.rating_count = j.at("rating_count").get<std::uint64_t>();
  return a;
}

Vote vote_from_json(const json& j) {
  Vote v;
  v.user_id = j.at("user_id").get<std::string>();
  v.feedback_id = j.at("feedback_id").get<std::string>();
  v.choice = parse_choice(j.at("choice").get<std::string>());
  v.cast_at = j.at("cast_at").get<Timestamp>();
  v.override = j.at("override").get<bool>();
  return v;
}

ReviewSession session_from_json(const json& j) {
  ReviewSession s;
  s.session_id = j.at("session_id").get<std::string>();
  s.user_id = j.at("user_id").get<std::string>();
  s.product_id = j.at("product_id").get<std::string>();
  s.appreciation = j.at("appreciation").get<double>();
  s.text = j.at("text").get<std::string>();
  s.selection = j.at("selection").get<std::vector<std::string>>();
  for (const auto& v : j.at("votes")) {
    s.votes.push_back(vote_from_json(v));
  }
  s.state = parse_state(j.at("state").get<std::string>());
  s.thin = j.at("thin").get<bool>();
  s.submitted_at = j.at("submitted_at").get<Timestamp>();
  return s;
}

std::string encode(const ChangeRecord& record) {
  json j = std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UserChange>) {
          return to_json(c.user);
        } else if constexpr (std::is_same_v<T, FeedbackChange>) {
          return to_json(c.feedback);
        } else if constexpr (std::is_same_v<T, VoteChange>) {
          json v = to_json(c.vote);
          v["session_id"] = c.session_id;
          v["trust_after"] = c.trust_after;
          return v;
        } else if constexpr (std::is_same_v<T, AggregateChange>) {
          return to_json(c.aggregate);
        } else if constexpr (std::is_same_v<T, SessionChange>) {
          return to_json(c.session);
        } else {
          return {{"user_id", c.user_id},
                  {"blacklist_until", c.blacklist_until}};
        }
      },
      record.change);
  j["kind"] = kind_of(record.change);
  if (record.txn) {
    j["txn"] = *record.txn;
  }
  return j.dump();
}

ChangeRecord decode(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (!j.is_object()) {
      throw Error(ErrorKind::CorruptJournal, "corrupt_journal",
                  "record is not a JSON object");
    }
    ChangeRecord r;
    r.txn = optional_field<std::string>(j, "txn");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "user") {
      r.change = UserChange{user_from_json(j)};
    } else if (kind == "feedback") {
      r.change = FeedbackChange{feedback_from_json(j)};
    } else if (kind == "vote") {
      r.change = VoteChange{j.at("session_id").get<std::string>(),
                            vote_from_json(j),
                            j.at("trust_after").get<double>()};
    } else if (kind == "aggregate") {
      r.change = AggregateChange{aggregate_from_json(j)};
    } else if (kind == "session") {
      r.change = SessionChange{session_from_json(j)};
    } else if (kind == "blacklist") {
      r.change = BlacklistChange{j.at("user_id").get<std::string>(),
                                 j.at("blacklist_until").get<Timestamp>()};
    } else {
      throw Error(ErrorKind::CorruptJournal, "corrupt_journal",
                  "unknown record kind '" + kind + "'");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptJournal, "corrupt_journal", e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptJournal) {
      throw;
    }
    throw Error(ErrorKind::CorruptJournal, "corrupt_journal", e.what());
  }
}

}  // namespace trs
