// extern "C" shim over the C++ core. Exceptions never cross this boundary.

#include "trs/trs.h"

#include <cstdlib>
#include <cstring>
#include <memory>

#include <json.hpp>

#include "engine.hpp"
#include "journal.hpp"
#include "service.hpp"
#include "simulator.hpp"

struct trs_engine {
  std::unique_ptr<trs::Engine> engine;
};

namespace {

struct LastError {
  std::string code = "ok";
  std::string message;
  std::int64_t retry_after = -1;
};

thread_local LastError g_last_error;

trs_status to_status(trs::ErrorKind kind) {
  switch (kind) {
    case trs::ErrorKind::InvalidArgument:
      return TRS_E_INVALID_ARGUMENT;
    case trs::ErrorKind::NotFound:
      return TRS_E_NOT_FOUND;
    case trs::ErrorKind::Conflict:
      return TRS_E_CONFLICT;
    case trs::ErrorKind::Blacklisted:
      return TRS_E_BLACKLISTED;
    case trs::ErrorKind::CorruptJournal:
      return TRS_E_CORRUPT_JOURNAL;
    case trs::ErrorKind::Io:
      return TRS_E_IO;
  }
  return TRS_E_INTERNAL;
}

trs_status fail(trs_status status, std::string code, std::string message,
                std::int64_t retry_after = -1) {
  g_last_error = {std::move(code), std::move(message), retry_after};
  return status;
}

template <class Fn>
trs_status guarded(Fn&& fn) {
  try {
    fn();
    return TRS_OK;
  } catch (const trs::Error& e) {
    return fail(to_status(e.kind()), e.code(), e.what(),
                e.retry_after_seconds().value_or(-1));
  } catch (const std::bad_alloc&) {
    return fail(TRS_E_INTERNAL, "out_of_memory", "allocation failed");
  } catch (const std::exception& e) {
    return fail(TRS_E_INTERNAL, "internal", e.what());
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void put(char** out, const std::string& s) {
  if (out != nullptr) {
    *out = dup_string(s);
  }
}

std::string required(const char* s, const char* what) {
  if (s == nullptr) {
    throw trs::Error(trs::ErrorKind::InvalidArgument, "invalid_argument",
                     std::string(what) + " must not be NULL");
  }
  return s;
}

trs::Engine& engine_of(const trs_engine* handle) {
  if (handle == nullptr || !handle->engine) {
    throw trs::Error(trs::ErrorKind::InvalidArgument, "invalid_argument",
                     "engine handle is NULL");
  }
  return *handle->engine;
}

trs::VoteChoice choice_of(trs_choice c) {
  if (c != TRS_LIKE && c != TRS_DISLIKE) {
    throw trs::Error(trs::ErrorKind::InvalidArgument, "invalid_choice",
                     "choice must be TRS_LIKE or TRS_DISLIKE");
  }
  return c == TRS_LIKE ? trs::VoteChoice::Like : trs::VoteChoice::Dislike;
}

}  // namespace

extern "C" {

const char* trs_version(void) { return "0.1.0"; }

const char* trs_last_error_code(void) { return g_last_error.code.c_str(); }

const char* trs_last_error_message(void) {
  return g_last_error.message.c_str();
}

int64_t trs_last_error_retry_after(void) { return g_last_error.retry_after; }

void trs_string_free(char* s) { std::free(s); }

trs_status trs_engine_open(const trs_engine_options* options,
                           trs_engine** out) {
  return guarded([&] {
    if (out == nullptr) {
      throw trs::Error(trs::ErrorKind::InvalidArgument, "invalid_argument",
                       "out must not be NULL");
    }
    *out = nullptr;
    trs_engine_options opts{};
    if (options != nullptr) {
      opts = *options;
    }
    trs::EngineConfig config;
    if (opts.blacklist_ttl > 0) {
      config.blacklist_ttl = opts.blacklist_ttl;
    }
    if (opts.default_k != 0) {
      config.default_k = opts.default_k;
    }
    auto lexicon = opts.lexicon_path != nullptr
                       ? trs::load_lexicon(opts.lexicon_path)
                       : trs::default_lexicon();
    auto store = opts.journal_path != nullptr
                     ? trs::Store::open(opts.journal_path)
                     : trs::Store();
    auto handle = std::make_unique<trs_engine>();
    handle->engine = std::make_unique<trs::Engine>(
        std::move(store), std::move(lexicon), config);
    *out = handle.release();
  });
}

void trs_engine_close(trs_engine* engine) { delete engine; }

trs_status trs_user_create(trs_engine* engine, const char* user_id, int64_t now,
                           char** out_json) {
  return guarded([&] {
    const auto user =
        engine_of(engine).create_user(required(user_id, "user_id"), now);
    put(out_json, trs::to_json(user).dump());
  });
}

trs_status trs_feedback_add(trs_engine* engine, const char* feedback_id,
                            const char* author_id, const char* product_id,
                            double appreciation, const char* text,
                            int has_trustworthiness, double trustworthiness,
                            int64_t now, char** out_json) {
  return guarded([&] {
    const auto record = engine_of(engine).add_prefabricated(
        feedback_id != nullptr ? feedback_id : "",
        required(author_id, "author_id"), required(product_id, "product_id"),
        appreciation, required(text, "text"),
        has_trustworthiness != 0 ? std::optional<double>(trustworthiness)
                                 : std::nullopt,
        now);
    put(out_json, trs::to_json(record).dump());
  });
}

trs_status trs_review_submit(trs_engine* engine, const char* user_id,
                             const char* product_id, double appreciation,
                             const char* text, int k, int64_t now,
                             char** out_json) {
  return guarded([&] {
    const auto session = engine_of(engine).submit_review(
        required(user_id, "user_id"), required(product_id, "product_id"),
        appreciation, required(text, "text"),
        k == 0 ? std::nullopt : std::optional<int>(k), now);
    put(out_json, trs::to_json(session).dump());
  });
}

trs_status trs_vote_cast(trs_engine* engine, const char* session_id,
                         const char* feedback_id, trs_choice choice,
                         int64_t now, char** out_json) {
  return guarded([&] {
    const auto o = engine_of(engine).process_vote(
        required(session_id, "session_id"), required(feedback_id, "feedback_id"),
        choice_of(choice), now);
    const nlohmann::json j = {
        {"session_id", o.session_id},
        {"user_id", o.user_id},
        {"feedback_id", o.feedback_id},
        {"choice", trs::to_string(o.choice)},
        {"feedtrustworth", o.feedtrustworth},
        {"adjustment",
         {{"kind", o.adjustment.kind == trs::TrustAdjustment::Kind::Delta
                       ? "Delta"
                       : "Override"},
          {"amount", o.adjustment.amount}}},
        {"trust_before", o.trust_before},
        {"trust_after", o.trust_after}};
    put(out_json, j.dump());
  });
}

trs_status trs_session_finalize(trs_engine* engine, const char* session_id,
                                int64_t now, char** out_json) {
  return guarded([&] {
    const auto o = engine_of(engine).finalize_session(
        required(session_id, "session_id"), now);
    const nlohmann::json j = {
        {"session_id", o.session_id},
        {"final_trust", o.final_trust},
        {"feedback_id", o.feedback_id},
        {"category", trs::to_string(o.category)},
        {"feedback_trustworthiness", o.feedback_trustworthiness},
        {"score_included", o.score_included},
        {"product_score", o.new_product_score
                              ? nlohmann::json(*o.new_product_score)
                              : nlohmann::json("unrated")},
        {"rating_count", o.rating_count}};
    put(out_json, j.dump());
  });
}

trs_status trs_product_score(const trs_engine* engine, const char* product_id,
                             double* score, int* rated,
                             uint64_t* rating_count) {
  return guarded([&] {
    const auto agg =
        engine_of(engine).product_aggregate(required(product_id, "product_id"));
    const auto s = agg.score();
    if (score != nullptr) {
      *score = s.value_or(0.0);
    }
    if (rated != nullptr) {
      *rated = s.has_value() ? 1 : 0;
    }
    if (rating_count != nullptr) {
      *rating_count = agg.rating_count;
    }
  });
}

trs_status trs_user_trust(const trs_engine* engine, const char* user_id,
                          int64_t now, double* trust_degree, int* blacklisted,
                          int64_t* blacklist_until) {
  return guarded([&] {
    const auto status =
        engine_of(engine).user_status(required(user_id, "user_id"), now);
    if (trust_degree != nullptr) {
      *trust_degree = status.user.trust_degree;
    }
    if (blacklisted != nullptr) {
      *blacklisted = status.blacklisted ? 1 : 0;
    }
    if (blacklist_until != nullptr) {
      *blacklist_until = status.user.blacklist_until.value_or(-1);
    }
  });
}

trs_status trs_product_feedbacks(const trs_engine* engine,
                                 const char* product_id, int category_filter,
                                 char** out_json) {
  return guarded([&] {
    std::optional<trs::FeedbackCategory> category;
    if (category_filter >= 0) {
      if (category_filter > TRS_CONTRADICTORY) {
        throw trs::Error(trs::ErrorKind::InvalidArgument, "invalid_category",
                         "unknown category filter");
      }
      category = trs::kAllCategories[static_cast<std::size_t>(category_filter)];
    }
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : engine_of(engine).product_feedbacks(
             required(product_id, "product_id"), category)) {
      list.push_back(trs::to_json(f));
    }
    put(out_json, list.dump());
  });
}

trs_status trs_engine_journal(const trs_engine* engine, char** out_text) {
  return guarded([&] {
    put(out_text, engine_of(engine).read(
                      [](const trs::Store& s) { return s.journal_text(); }));
  });
}

trs_status trs_trust_adjustment(double feedtrustworth, trs_choice choice,
                                trs_adjustment_kind* kind, double* amount) {
  return guarded([&] {
    const auto adj = trs::trust_adjustment(feedtrustworth, choice_of(choice));
    if (kind != nullptr) {
      *kind = adj.kind == trs::TrustAdjustment::Kind::Delta
                  ? TRS_ADJUST_DELTA
                  : TRS_ADJUST_OVERRIDE;
    }
    if (amount != nullptr) {
      *amount = adj.amount;
    }
  });
}

trs_status trs_classify(const trs_engine* engine, const char* text,
                        trs_category* category, double* polarity) {
  return guarded([&] {
    const auto& lexicon =
        engine != nullptr ? engine_of(engine).lexicon() : trs::default_lexicon();
    const auto report = trs::sentiment_score(required(text, "text"), lexicon);
    if (category != nullptr) {
      *category = static_cast<trs_category>(trs::classify_feedback(report));
    }
    if (polarity != nullptr) {
      *polarity = report.overall;
    }
  });
}

trs_status trs_simulate(const char* config_json, const char* format,
                        char** out_text) {
  return guarded([&] {
    const auto fmt = trs::parse_report_format(required(format, "format"));
    const auto config =
        trs::parse_scenario(required(config_json, "config_json"));
    put(out_text, trs::emit_report(trs::run_simulation(config), fmt));
  });
}

trs_status trs_serve(trs_engine* engine, const trs_serve_options* options) {
  return guarded([&] {
    trs_serve_options opts{"127.0.0.1", 8080, 0};
    if (options != nullptr) {
      opts = *options;
    }
    trs::Service service(engine_of(engine),
                         trs::ServiceOptions{opts.test_mode != 0});
    service.bind(opts.host != nullptr ? opts.host : "127.0.0.1", opts.port);
    service.serve();
  });
}

}  // extern "C"
