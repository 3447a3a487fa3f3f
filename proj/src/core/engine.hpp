// The reputation algorithm: concordance gate, fresh selection, per-click trust
// update, clamping, feedback trustworthiness and the trust-weighted product
// score.

#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "domain.hpp"
#include "store.hpp"
#include "text_analysis.hpp"

namespace trs {

struct TrustAdjustment {
  enum class Kind { Delta, Override };

  Kind kind = Kind::Delta;
  /// Delta amount, or the override value (-10).
  double amount = 0.0;

  static TrustAdjustment delta(double d) { return {Kind::Delta, d}; }
  static TrustAdjustment override_to(double v) { return {Kind::Override, v}; }

  bool operator==(const TrustAdjustment&) const = default;
};

/// Reward/punishment for one like or dislike on a feedback of the given
/// trustworthiness.
///
/// Magnitude bands on |trustworthiness| are half-open (lo, hi]:
///   (0,3] 0.25   (3,5] 0.5   (5,7] 0.75   (7,8] 1   (8,9] 1.5   (9,10] 2
/// A like on a positive feedback or a dislike on a negative one earns the
/// band amount; the opposite choice loses it. Zero trustworthiness carries
/// no evidence. Liking a -10 (contradictory) feedback overrides trust to -10.
TrustAdjustment trust_adjustment(double feedtrustworth, VoteChoice choice);

/// What a vote actually applies. The override is reserved for feedbacks
/// classified Contradictory; any other feedback that sits at -10 (its author
/// clamped there) is scored by the (9,10] band like its neighbours.
TrustAdjustment trust_adjustment(const FeedbackRecord& feedback,
                                 VoteChoice choice);

/// Clamps into [-10,10]; overrides replace the current value.
double apply_adjustment(double trust_before, const TrustAdjustment& adj);

struct ScoreUpdate {
  ProductAggregate aggregate;
  std::optional<double> score;
  bool included = false;
};

/// Adds appreciation `appreciation` with coefficient `trust`. Non-positive
/// trust leaves the aggregate untouched.
ScoreUpdate update_product_score(const ProductAggregate& aggregate,
                                 double appreciation, double trust);

struct VoteOutcome {
  std::string session_id;
  std::string user_id;
  std::string feedback_id;
  VoteChoice choice = VoteChoice::Like;
  double feedtrustworth = 0.0;
  TrustAdjustment adjustment;
  double trust_before = 0.0;
  double trust_after = 0.0;
};

struct SessionOutcome {
  std::string session_id;
  double final_trust = 0.0;
  std::string feedback_id;
  FeedbackCategory category = FeedbackCategory::Mitigated;
  double feedback_trustworthiness = 0.0;
  bool score_included = false;
  std::optional<double> new_product_score;
  std::uint64_t rating_count = 0;
};

struct EngineConfig {
  std::int64_t blacklist_ttl = kDefaultBlacklistTtl;
  int default_k = kDefaultSelection;
};

struct UserStatus {
  UserRecord user;
  bool blacklisted = false;
  std::optional<std::int64_t> retry_after_seconds;
};

/// Owns the store and serialises every mutation through one writer lock.
/// Readers share the lock. All operations take an explicit `now`.
class Engine {
 public:
  Engine(Store store, Lexicon lexicon, EngineConfig config = {});

  UserRecord create_user(const std::string& user_id, Timestamp now);

  /// Stores a prefabricated feedback. The text is classified here; a
  /// Contradictory text is forced to trustworthiness -10. Without an explicit
  /// trustworthiness the author's current trust degree is used. An empty id
  /// asks the engine to assign one.
  FeedbackRecord add_prefabricated(std::string feedback_id,
                                   const std::string& author_id,
                                   const std::string& product_id,
                                   double appreciation, const std::string& text,
                                   std::optional<double> trustworthiness,
                                   Timestamp now);

  /// Concordance gate then selection. A discordant pair yields a Rejected
  /// session and blacklists the user. Throws "blacklisted" with the remaining
  /// time while a blacklist is active.
  ReviewSession submit_review(const std::string& user_id,
                              const std::string& product_id,
                              double appreciation, const std::string& text,
                              std::optional<int> k, Timestamp now);

  VoteOutcome process_vote(const std::string& session_id,
                           const std::string& feedback_id, VoteChoice choice,
                           Timestamp now);

  SessionOutcome finalize_session(const std::string& session_id,
                                  Timestamp now);

  UserStatus user_status(const std::string& user_id, Timestamp now) const;
  ProductAggregate product_aggregate(const std::string& product_id) const;
  std::vector<FeedbackRecord> product_feedbacks(
      const std::string& product_id,
      std::optional<FeedbackCategory> category) const;
  ReviewSession session(const std::string& session_id) const;

  const Lexicon& lexicon() const { return lexicon_; }
  const EngineConfig& config() const { return config_; }

  /// Runs `fn(const Store&)` under the shared lock.
  template <class Fn>
  decltype(auto) read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(store_);
  }

 private:
  mutable std::shared_mutex mutex_;
  Store store_;
  Lexicon lexicon_;
  EngineConfig config_;
};

}  // namespace trs
