#include "store.hpp"

#include <algorithm>
#include <sstream>

namespace trs {

namespace {

std::size_t category_slot(FeedbackCategory c) {
  return static_cast<std::size_t>(c);
}

[[noreturn]] void not_found(std::string code, std::string_view what,
                            std::string_view id) {
  throw Error(ErrorKind::NotFound, std::move(code),
              "unknown " + std::string(what) + " '" + std::string(id) + "'");
}

[[noreturn]] void conflict(std::string code, const std::string& message) {
  throw Error(ErrorKind::Conflict, std::move(code), message);
}

void validate_session_shape(const ReviewSession& s) {
  check_identifier("session_id", s.session_id);
  check_identifier("user_id", s.user_id);
  check_identifier("product_id", s.product_id);
  check_appreciation(s.appreciation);
  std::set<std::string_view> served(s.selection.begin(), s.selection.end());
  if (served.size() != s.selection.size()) {
    conflict("invalid_session", "session '" + s.session_id +
                                    "' serves a feedback twice");
  }
  std::set<std::string_view> voted;
  for (const auto& v : s.votes) {
    if (!served.count(v.feedback_id) || !voted.insert(v.feedback_id).second) {
      conflict("invalid_session", "session '" + s.session_id +
                                      "' has a stray or repeated vote");
    }
  }
  if (s.state == SessionState::Finalized && voted.size() != served.size()) {
    conflict("invalid_session",
             "finalized session '" + s.session_id + "' has unvoted feedbacks");
  }
}

}  // namespace

Store::Store() = default;
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

Store Store::replay(std::string_view journal) {
  Store store;
  std::map<std::string, std::vector<ChangeRecord>> pending;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < journal.size()) {
    const auto nl = journal.find('\n', pos);
    const auto line = journal.substr(
        pos, nl == std::string_view::npos ? journal.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? journal.size() : nl + 1;
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    try {
      auto record = decode(line);
      if (record.txn && !record.closes_transaction()) {
        pending[*record.txn].push_back(std::move(record));
        continue;
      }
      if (record.txn) {
        const auto it = pending.find(*record.txn);
        if (it != pending.end()) {
          for (const auto& staged : it->second) {
            store.apply_record(staged);
          }
          pending.erase(it);
        }
      }
      store.apply_record(record);
    } catch (const Error& e) {
      throw Error(ErrorKind::CorruptJournal, "corrupt_journal",
                  "journal line " + std::to_string(line_no) + ": " + e.what());
    }
    store.memory_journal_.append(line);
    store.memory_journal_.push_back('\n');
    ++store.journal_lines_;
  }
  // Transactions without their closing record never happened.
  return store;
}

Store Store::open(const std::filesystem::path& path) {
  Store store;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorKind::Io, "io_error",
                  "cannot read journal '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    store = replay(buf.str());
    store.memory_journal_.clear();
  }
  store.file_ = std::make_unique<std::ofstream>(
      path, std::ios::binary | std::ios::app);
  if (!*store.file_) {
    throw Error(ErrorKind::Io, "io_error",
                "cannot open journal '" + path.string() + "' for append");
  }
  return store;
}

const UserRecord& Store::create_user(const std::string& user_id,
                                     Timestamp now) {
  auto record = new_user(user_id, now);
  if (users_.count(user_id) != 0) {
    conflict("duplicate_user", "user '" + user_id + "' already exists");
  }
  commit({UserChange{record}});
  return users_.find(user_id)->second;
}

std::string Store::store_feedback(const FeedbackRecord& record) {
  validate(record);
  if (feedbacks_.count(record.feedback_id) != 0) {
    conflict("duplicate_feedback",
             "feedback '" + record.feedback_id + "' already exists");
  }
  commit({FeedbackChange{record}});
  return record.feedback_id;
}

UserRecord Store::blacklist_user(const std::string& user_id, Timestamp now,
                                 std::int64_t ttl_seconds) {
  if (ttl_seconds <= 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid_ttl",
                "blacklist ttl must be positive");
  }
  user(user_id);
  commit({BlacklistChange{user_id, now + ttl_seconds}});
  return user(user_id);
}

bool Store::is_blacklisted(const std::string& user_id, Timestamp now) const {
  const auto& u = user(user_id);
  return u.blacklist_until.has_value() && now < *u.blacklist_until;
}

Selection Store::select_prefabricated(const std::string& product_id, int k,
                                      std::string_view requester) const {
  check_selection_size(k);
  Selection out;
  const auto it = by_product_.find(product_id);
  if (it == by_product_.end()) {
    out.thin = true;
    return out;
  }

  const auto& index = it->second;
  std::array<std::set<IndexKey>::const_iterator, 4> cursor;
  for (std::size_t c = 0; c < 4; ++c) {
    cursor[c] = index[c].begin();
  }
  const auto target = static_cast<std::size_t>(k);
  bool progressed = true;
  while (out.feedbacks.size() < target && progressed) {
    progressed = false;
    for (std::size_t c = 0; c < 4 && out.feedbacks.size() < target; ++c) {
      while (cursor[c] != index[c].end()) {
        const auto& record = feedbacks_.find(cursor[c]->feedback_id)->second;
        ++cursor[c];
        if (!requester.empty() && record.author_id == requester) {
          continue;
        }
        out.feedbacks.push_back(record);
        progressed = true;
        break;
      }
    }
  }
  out.thin = out.feedbacks.size() < target;
  return out;
}

const UserRecord* Store::find_user(std::string_view user_id) const {
  const auto it = users_.find(user_id);
  return it == users_.end() ? nullptr : &it->second;
}

const FeedbackRecord* Store::find_feedback(std::string_view feedback_id) const {
  const auto it = feedbacks_.find(feedback_id);
  return it == feedbacks_.end() ? nullptr : &it->second;
}

const ReviewSession* Store::find_session(std::string_view session_id) const {
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

const UserRecord& Store::user(std::string_view user_id) const {
  if (const auto* u = find_user(user_id)) {
    return *u;
  }
  not_found("unknown_user", "user", user_id);
}

const FeedbackRecord& Store::feedback(std::string_view feedback_id) const {
  if (const auto* f = find_feedback(feedback_id)) {
    return *f;
  }
  not_found("unknown_feedback", "feedback", feedback_id);
}

const ReviewSession& Store::session(std::string_view session_id) const {
  if (const auto* s = find_session(session_id)) {
    return *s;
  }
  not_found("unknown_session", "session", session_id);
}

ProductAggregate Store::aggregate(std::string_view product_id) const {
  const auto it = aggregates_.find(product_id);
  if (it != aggregates_.end()) {
    return it->second;
  }
  ProductAggregate empty;
  empty.product_id = std::string(product_id);
  return empty;
}

std::vector<FeedbackRecord> Store::feedbacks_for(
    std::string_view product_id,
    std::optional<FeedbackCategory> category) const {
  std::vector<FeedbackRecord> out;
  const auto it = by_product_.find(product_id);
  if (it == by_product_.end()) {
    return out;
  }
  std::set<IndexKey> merged;
  for (auto c : kAllCategories) {
    if (!category || *category == c) {
      merged.insert(it->second[category_slot(c)].begin(),
                    it->second[category_slot(c)].end());
    }
  }
  for (const auto& key : merged) {
    out.push_back(feedbacks_.find(key.feedback_id)->second);
  }
  return out;
}

std::vector<FeedbackRecord> Store::feedbacks_by_author(
    std::string_view author_id) const {
  std::vector<FeedbackRecord> out;
  const auto it = by_author_.find(author_id);
  if (it == by_author_.end()) {
    return out;
  }
  for (const auto& id : it->second) {
    out.push_back(feedbacks_.find(id)->second);
  }
  return out;
}

void Store::commit(std::vector<Change> changes, std::optional<std::string> txn) {
  if (changes.empty()) {
    return;
  }
  if (txn) {
    const ChangeRecord last{changes.back(), txn};
    if (!last.closes_transaction()) {
      throw std::logic_error("transaction must end with its session record");
    }
  }
  for (const auto& c : changes) {
    precheck(c);
  }
  std::string lines;
  for (const auto& c : changes) {
    lines += encode(ChangeRecord{c, txn});
    lines.push_back('\n');
  }
  write_line(lines);
  journal_lines_ += changes.size();
  for (const auto& c : changes) {
    apply(c);
  }
}

void Store::write_line(const std::string& lines) {
  if (file_) {
    *file_ << lines;
    file_->flush();
    if (!*file_) {
      throw Error(ErrorKind::Io, "io_error", "journal write failed");
    }
  } else {
    memory_journal_ += lines;
  }
}

void Store::precheck(const Change& change) const {
  std::visit(
      [this](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UserChange>) {
          validate(c.user);
        } else if constexpr (std::is_same_v<T, FeedbackChange>) {
          validate(c.feedback);
          user(c.feedback.author_id);
          if (const auto* old = find_feedback(c.feedback.feedback_id);
              old && old->created_at != c.feedback.created_at) {
            conflict("invalid_feedback", "created_at of feedback '" +
                                             c.feedback.feedback_id +
                                             "' is immutable");
          }
        } else if constexpr (std::is_same_v<T, VoteChange>) {
          const auto& s = session(c.session_id);
          if (s.state != SessionState::Voting) {
            conflict("session_state",
                     "session '" + s.session_id + "' is not accepting votes");
          }
          if (c.vote.user_id != s.user_id) {
            conflict("wrong_user", "vote user does not own session '" +
                                       s.session_id + "'");
          }
          user(c.vote.user_id);
          feedback(c.vote.feedback_id);
          if (!s.serves(c.vote.feedback_id)) {
            conflict("feedback_not_in_selection",
                     "feedback '" + c.vote.feedback_id +
                         "' was not served in session '" + s.session_id + "'");
          }
          if (s.has_vote_for(c.vote.feedback_id)) {
            conflict("duplicate_vote", "feedback '" + c.vote.feedback_id +
                                           "' already voted in session '" +
                                           s.session_id + "'");
          }
          check_trust("trust_after", c.trust_after);
          if ((s.pinned() || c.vote.override) && c.trust_after != kMinTrust) {
            conflict("invalid_vote", "session '" + s.session_id +
                                         "' is pinned at -10");
          }
        } else if constexpr (std::is_same_v<T, AggregateChange>) {
          validate(c.aggregate);
        } else if constexpr (std::is_same_v<T, SessionChange>) {
          validate_session_shape(c.session);
          user(c.session.user_id);
          for (const auto& id : c.session.selection) {
            feedback(id);
          }
        } else {
          const auto& u = user(c.user_id);
          if (c.blacklist_until < u.created_at) {
            throw Error(ErrorKind::InvalidArgument, "invalid_blacklist",
                        "blacklist_until precedes created_at");
          }
        }
      },
      change);
}

void Store::apply(const Change& change) {
  std::visit(
      [this](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UserChange>) {
          users_[c.user.user_id] = c.user;
        } else if constexpr (std::is_same_v<T, FeedbackChange>) {
          const auto it = feedbacks_.find(c.feedback.feedback_id);
          if (it != feedbacks_.end()) {
            unindex_feedback(it->second);
            it->second = c.feedback;
          } else {
            feedbacks_.emplace(c.feedback.feedback_id, c.feedback);
          }
          index_feedback(c.feedback);
        } else if constexpr (std::is_same_v<T, VoteChange>) {
          sessions_.find(c.session_id)->second.votes.push_back(c.vote);
          users_.find(c.vote.user_id)->second.trust_degree = c.trust_after;
        } else if constexpr (std::is_same_v<T, AggregateChange>) {
          aggregates_[c.aggregate.product_id] = c.aggregate;
        } else if constexpr (std::is_same_v<T, SessionChange>) {
          sessions_[c.session.session_id] = c.session;
        } else {
          users_.find(c.user_id)->second.blacklist_until = c.blacklist_until;
        }
      },
      change);
}

void Store::apply_record(const ChangeRecord& record) {
  precheck(record.change);
  apply(record.change);
}

void Store::index_feedback(const FeedbackRecord& record) {
  by_product_[record.product_id][category_slot(record.category)].insert(
      IndexKey{record.created_at, record.feedback_id});
  by_author_[record.author_id].insert(record.feedback_id);
}

void Store::unindex_feedback(const FeedbackRecord& record) {
  by_product_[record.product_id][category_slot(record.category)].erase(
      IndexKey{record.created_at, record.feedback_id});
  by_author_[record.author_id].erase(record.feedback_id);
}

bool Store::operator==(const Store& other) const {
  return users_ == other.users_ && feedbacks_ == other.feedbacks_ &&
         aggregates_ == other.aggregates_ && sessions_ == other.sessions_;
}

}  // namespace trs
