/*
 * trs.h: C interface to the trust-reputation engine.
 *
 * An engine handle owns a knowledge base (optionally journaled to a file), a
 * sentiment lexicon and the engine configuration. Every call returns a
 * trs_status; on failure trs_last_error_code() and trs_last_error_message()
 * describe the error for the calling thread until its next failing call.
 *
 * Calls that produce structured results hand back a NUL-terminated JSON
 * document through `char** out_json`. Release it with trs_string_free().
 *
 * Timestamps are UTC seconds supplied by the caller.
 */

#ifndef TRS_TRS_H_
#define TRS_TRS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TRS_BUILDING_LIBRARY)
#define TRS_API __attribute__((visibility("default")))
#else
#define TRS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct trs_engine trs_engine;

typedef enum trs_status {
  TRS_OK = 0,
  TRS_E_INVALID_ARGUMENT = 1,
  TRS_E_NOT_FOUND = 2,
  TRS_E_CONFLICT = 3,
  TRS_E_BLACKLISTED = 4,
  TRS_E_CORRUPT_JOURNAL = 5,
  TRS_E_IO = 6,
  TRS_E_INTERNAL = 7
} trs_status;

typedef enum trs_choice { TRS_LIKE = 0, TRS_DISLIKE = 1 } trs_choice;

typedef enum trs_category {
  TRS_POSITIVE = 0,
  TRS_NEGATIVE = 1,
  TRS_MITIGATED = 2,
  TRS_CONTRADICTORY = 3
} trs_category;

typedef enum trs_adjustment_kind {
  TRS_ADJUST_DELTA = 0,
  TRS_ADJUST_OVERRIDE = 1
} trs_adjustment_kind;

typedef struct trs_engine_options {
  /* Journal file to replay and append to; NULL keeps the journal in memory. */
  const char* journal_path;
  /* Lexicon file; NULL selects the built-in lexicon. */
  const char* lexicon_path;
  /* Seconds a discordant reviewer stays blacklisted; <= 0 means 86400. */
  int64_t blacklist_ttl;
  /* Selection size used when a review does not pick one; 0 means 6. */
  int default_k;
} trs_engine_options;

TRS_API const char* trs_version(void);

/* Machine-readable code ("duplicate_vote", "invalid_k", ...) and message of
 * the calling thread's most recent failure. Never NULL. */
TRS_API const char* trs_last_error_code(void);
TRS_API const char* trs_last_error_message(void);
/* Remaining blacklist seconds for the last TRS_E_BLACKLISTED, else -1. */
TRS_API int64_t trs_last_error_retry_after(void);

TRS_API void trs_string_free(char* s);

TRS_API trs_status trs_engine_open(const trs_engine_options* options,
                                   trs_engine** out);
TRS_API void trs_engine_close(trs_engine* engine);

TRS_API trs_status trs_user_create(trs_engine* engine, const char* user_id,
                                   int64_t now, char** out_json);

/* feedback_id may be NULL (engine-assigned). trustworthiness is used only
 * when has_trustworthiness is non-zero; otherwise the author's trust applies.
 * A Contradictory text is always stored at -10. */
TRS_API trs_status trs_feedback_add(trs_engine* engine, const char* feedback_id,
                                    const char* author_id,
                                    const char* product_id, double appreciation,
                                    const char* text, int has_trustworthiness,
                                    double trustworthiness, int64_t now,
                                    char** out_json);

/* k = 0 selects the engine default. A discordant review succeeds with a
 * session whose state is "Rejected". */
TRS_API trs_status trs_review_submit(trs_engine* engine, const char* user_id,
                                     const char* product_id,
                                     double appreciation, const char* text,
                                     int k, int64_t now, char** out_json);

TRS_API trs_status trs_vote_cast(trs_engine* engine, const char* session_id,
                                 const char* feedback_id, trs_choice choice,
                                 int64_t now, char** out_json);

TRS_API trs_status trs_session_finalize(trs_engine* engine,
                                        const char* session_id, int64_t now,
                                        char** out_json);

/* *rated is 0 while the product has no included rating; *score is then 0. */
TRS_API trs_status trs_product_score(const trs_engine* engine,
                                     const char* product_id, double* score,
                                     int* rated, uint64_t* rating_count);

/* *blacklist_until is -1 when no blacklist was ever set. */
TRS_API trs_status trs_user_trust(const trs_engine* engine,
                                  const char* user_id, int64_t now,
                                  double* trust_degree, int* blacklisted,
                                  int64_t* blacklist_until);

/* category_filter < 0 lists every category. */
TRS_API trs_status trs_product_feedbacks(const trs_engine* engine,
                                         const char* product_id,
                                         int category_filter, char** out_json);

/* Journal text of an in-memory engine (empty for file-backed engines). */
TRS_API trs_status trs_engine_journal(const trs_engine* engine,
                                      char** out_text);

/* Pure helpers. */
TRS_API trs_status trs_trust_adjustment(double feedtrustworth, trs_choice choice,
                                        trs_adjustment_kind* kind,
                                        double* amount);
TRS_API trs_status trs_classify(const trs_engine* engine, const char* text,
                                trs_category* category, double* polarity);

/* Runs a scenario (JSON config text) and renders the report as "json",
 * "csv" or "table". */
TRS_API trs_status trs_simulate(const char* config_json, const char* format,
                                char** out_text);

typedef struct trs_serve_options {
  const char* host;
  int port;
  /* Honour the X-Now request header. */
  int test_mode;
} trs_serve_options;

/* Serves the HTTP API for `engine` until the process ends. Blocks. */
TRS_API trs_status trs_serve(trs_engine* engine,
                             const trs_serve_options* options);

#ifdef __cplusplus
}
#endif

#endif /* TRS_TRS_H_ */
