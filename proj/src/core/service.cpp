#include "service.hpp"

#include <chrono>
#include <charconv>
#include <functional>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "journal.hpp"

namespace trs {

using nlohmann::json;

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return 400;
    case ErrorKind::NotFound:
      return 404;
    case ErrorKind::Conflict:
      return 409;
    case ErrorKind::Blacklisted:
      return 403;
    case ErrorKind::CorruptJournal:
    case ErrorKind::Io:
      return 500;
  }
  return 500;
}

json error_body(const std::string& code, const std::string& message,
                std::optional<std::int64_t> retry_after = std::nullopt) {
  json err = {{"code", code}, {"message", message}};
  if (retry_after) {
    err["retry_after_seconds"] = *retry_after;
  }
  return {{"error", std::move(err)}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

[[noreturn]] void bad_body(const std::string& code, const std::string& msg) {
  throw Error(ErrorKind::InvalidArgument, code, msg);
}

/// Parses a JSON object body holding only `required` and `optional` keys.
json parse_body(const std::string& body,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  json j;
  if (body.empty()) {
    j = json::object();
  } else {
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      bad_body("invalid_body", std::string("malformed JSON: ") + e.what());
    }
  }
  if (!j.is_object()) {
    bad_body("invalid_body", "request body must be a JSON object");
  }
  std::set<std::string> allowed(required.begin(), required.end());
  allowed.insert(optional.begin(), optional.end());
  for (const auto& [key, _] : j.items()) {
    if (allowed.count(key) == 0) {
      bad_body("unknown_field", "unknown field '" + key + "'");
    }
  }
  for (const auto* key : required) {
    if (!j.contains(key)) {
      bad_body("missing_field", std::string("missing field '") + key + "'");
    }
  }
  return j;
}

template <class T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_body("invalid_body", std::string("field '") + key + "' has wrong type");
  }
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return field<T>(j, key);
}

double number_field(const json& j, const char* key) {
  if (!j.at(key).is_number()) {
    bad_body("invalid_body", std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

json score_json(const ProductAggregate& a) {
  const auto score = a.score();
  return {{"product_id", a.product_id},
          {"score", score ? json(*score) : json("unrated")},
          {"rating_count", a.rating_count}};
}

json adjustment_json(const TrustAdjustment& adj) {
  return {{"kind",
           adj.kind == TrustAdjustment::Kind::Delta ? "Delta" : "Override"},
          {"amount", adj.amount}};
}

}  // namespace

struct Service::Impl {
  Engine& engine;
  ServiceOptions options;
  httplib::Server server;

  Impl(Engine& e, ServiceOptions o) : engine(e), options(o) { routes(); }

  Timestamp now(const httplib::Request& req) const {
    if (options.test_mode && req.has_header(kNowHeader)) {
      const auto text = req.get_header_value(kNowHeader);
      Timestamp t = 0;
      const auto [ptr, ec] =
          std::from_chars(text.data(), text.data() + text.size(), t);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        bad_body("invalid_clock", "X-Now must be integer UTC seconds");
      }
      return t;
    }
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  using Handler =
      std::function<void(const httplib::Request&, httplib::Response&)>;

  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req,
                              httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        if (e.retry_after_seconds()) {
          res.set_header("Retry-After",
                         std::to_string(*e.retry_after_seconds()));
        }
        send(res, status_for(e.kind()),
             error_body(e.code(), e.what(), e.retry_after_seconds()));
      } catch (const std::exception& e) {
        send(res, 500, error_body("internal", e.what()));
      }
    };
  }

  void routes() {
    server.set_post_routing_handler(
        [](const httplib::Request&, httplib::Response& res) {
          res.set_header("Access-Control-Allow-Origin", "*");
        });
    server.Options(R"(.*)", [](const httplib::Request&,
                               httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers",
                     std::string("Content-Type, ") + kNowHeader);
      res.status = 204;
    });

    server.Post("/users", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req.body, {"user_id"});
      const auto user =
          engine.create_user(field<std::string>(body, "user_id"), now(req));
      send(res, 201, to_json(user));
    }));

    server.Post("/feedbacks", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body =
          parse_body(req.body, {"author_id", "product_id", "appreciation", "text"},
                     {"feedback_id", "trustworthiness"});
      const auto record = engine.add_prefabricated(
          optional_field<std::string>(body, "feedback_id").value_or(""),
          field<std::string>(body, "author_id"),
          field<std::string>(body, "product_id"),
          number_field(body, "appreciation"), field<std::string>(body, "text"),
          body.contains("trustworthiness")
              ? std::optional<double>(number_field(body, "trustworthiness"))
              : std::nullopt,
          now(req));
      send(res, 201, to_json(record));
    }));

    server.Post("/reviews", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body =
          parse_body(req.body, {"user_id", "product_id", "appreciation", "text"},
                     {"k"});
      std::optional<int> k;
      if (body.contains("k") && !body.at("k").is_null()) {
        if (!body.at("k").is_number_integer()) {
          bad_body("invalid_k", "k must be an integer");
        }
        k = body.at("k").get<int>();
      }
      const auto session = engine.submit_review(
          field<std::string>(body, "user_id"),
          field<std::string>(body, "product_id"),
          number_field(body, "appreciation"), field<std::string>(body, "text"),
          k, now(req));
      if (session.state == SessionState::Rejected) {
        auto out = error_body(
            "discordant",
            "appreciation and text disagree; user blacklisted temporarily",
            engine.config().blacklist_ttl);
        out["session_id"] = session.session_id;
        res.set_header("Retry-After",
                       std::to_string(engine.config().blacklist_ttl));
        send(res, 409, out);
        return;
      }
      send(res, 201, session_view(session));
    }));

    server.Get(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, session_view(engine.session(req.matches[1])));
               }));

    server.Post(R"(/sessions/([^/]+)/votes)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body =
                      parse_body(req.body, {"feedback_id", "choice"});
                  const auto outcome = engine.process_vote(
                      req.matches[1], field<std::string>(body, "feedback_id"),
                      parse_choice(field<std::string>(body, "choice")),
                      now(req));
                  send(res, 200,
                       {{"session_id", outcome.session_id},
                        {"user_id", outcome.user_id},
                        {"feedback_id", outcome.feedback_id},
                        {"choice", to_string(outcome.choice)},
                        {"adjustment", adjustment_json(outcome.adjustment)},
                        {"trust_before", outcome.trust_before},
                        {"trust_after", outcome.trust_after}});
                }));

    server.Post(
        R"(/sessions/([^/]+)/finalize)",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          parse_body(req.body, {});
          const auto o = engine.finalize_session(req.matches[1], now(req));
          send(res, 200,
               {{"session_id", o.session_id},
                {"final_trust", o.final_trust},
                {"feedback_id", o.feedback_id},
                {"category", to_string(o.category)},
                {"feedback_trustworthiness", o.feedback_trustworthiness},
                {"score_included", o.score_included},
                {"product_score", o.new_product_score
                                      ? json(*o.new_product_score)
                                      : json("unrated")},
                {"rating_count", o.rating_count}});
        }));

    server.Get(R"(/products/([^/]+)/score)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200,
                      score_json(engine.product_aggregate(req.matches[1])));
               }));

    server.Get(R"(/products/([^/]+)/feedbacks)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 std::optional<FeedbackCategory> category;
                 if (req.has_param("category")) {
                   category = parse_category(req.get_param_value("category"));
                 }
                 json list = json::array();
                 for (const auto& f :
                      engine.product_feedbacks(req.matches[1], category)) {
                   list.push_back(to_json(f));
                 }
                 send(res, 200,
                      {{"product_id", std::string(req.matches[1])},
                       {"feedbacks", std::move(list)}});
               }));

    server.Get(R"(/users/([^/]+)/trust)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto status = engine.user_status(req.matches[1], now(req));
                 json out = {
                     {"user_id", status.user.user_id},
                     {"trust_degree", status.user.trust_degree},
                     {"blacklisted", status.blacklisted},
                     {"blacklist_until",
                      status.user.blacklist_until
                          ? json(*status.user.blacklist_until)
                          : json(nullptr)},
                     {"retry_after_seconds",
                      status.retry_after_seconds
                          ? json(*status.retry_after_seconds)
                          : json(nullptr)}};
                 send(res, 200, out);
               }));
  }

  /// Served feedbacks without their trustworthiness: the voter judges the
  /// text, not the score.
  json session_view(const ReviewSession& s) const {
    json served = json::array();
    engine.read([&](const Store& store) {
      for (const auto& id : s.selection) {
        const auto& f = store.feedback(id);
        served.push_back({{"feedback_id", f.feedback_id},
                          {"text", f.text},
                          {"category", to_string(f.category)}});
      }
      return 0;
    });
    json out = to_json(s);
    out["served"] = std::move(served);
    return out;
  }
};

Service::Service(Engine& engine, ServiceOptions options)
    : impl_(std::make_unique<Impl>(engine, options)) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) {
      throw Error(ErrorKind::Io, "io_error", "cannot bind " + host);
    }
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::Io, "io_error",
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) {
    impl_->server.stop();
  }
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace trs
