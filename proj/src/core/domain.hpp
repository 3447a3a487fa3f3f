// Shared domain types for the trust-reputation engine.
//
// Every other module speaks in these values. Mutation never happens on the
// types directly: the knowledge base owns the only mutable copies.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trs {

/// UTC seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr double kMinTrust = -10.0;
inline constexpr double kMaxTrust = 10.0;
inline constexpr double kInitialTrust = 0.0;
inline constexpr double kMinAppreciation = 1.0;
inline constexpr double kMaxAppreciation = 5.0;
inline constexpr int kMinSelection = 4;
inline constexpr int kMaxSelection = 10;
inline constexpr int kDefaultSelection = 6;
inline constexpr std::int64_t kDefaultBlacklistTtl = 86400;

enum class ErrorKind {
  InvalidArgument,
  NotFound,
  Conflict,
  Blacklisted,
  CorruptJournal,
  Io,
};

/// The single exception type thrown across the core. `code` is a stable,
/// machine-readable identifier ("duplicate_vote", "invalid_k", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message,
        std::optional<std::int64_t> retry_after_seconds = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  std::optional<std::int64_t> retry_after_seconds() const noexcept {
    return retry_after_;
  }

 private:
  ErrorKind kind_;
  std::string code_;
  std::optional<std::int64_t> retry_after_;
};

struct UserRecord {
  std::string user_id;
  double trust_degree = kInitialTrust;
  std::optional<Timestamp> blacklist_until;
  Timestamp created_at = 0;

  bool operator==(const UserRecord&) const = default;
};

enum class FeedbackCategory { Positive, Negative, Mitigated, Contradictory };

/// Fixed order used by selection round-robin.
inline constexpr std::array<FeedbackCategory, 4> kAllCategories = {
    FeedbackCategory::Positive, FeedbackCategory::Negative,
    FeedbackCategory::Mitigated, FeedbackCategory::Contradictory};

struct FeedbackRecord {
  std::string feedback_id;
  std::string product_id;
  std::string author_id;
  std::string text;
  FeedbackCategory category = FeedbackCategory::Mitigated;
  double trustworthiness = 0.0;
  Timestamp created_at = 0;
  double appreciation = kMinAppreciation;

  bool operator==(const FeedbackRecord&) const = default;
};

/// Running trust-weighted sums for one product. Only raters with strictly
/// positive trust ever contribute, so coefficient_sum > 0 once rated.
struct ProductAggregate {
  std::string product_id;
  double weighted_sum = 0.0;
  double coefficient_sum = 0.0;
  std::uint64_t rating_count = 0;

  /// Absent while the product is unrated.
  std::optional<double> score() const;

  bool operator==(const ProductAggregate&) const = default;
};

enum class VoteChoice { Like, Dislike };

struct Vote {
  std::string user_id;
  std::string feedback_id;
  VoteChoice choice = VoteChoice::Like;
  Timestamp cast_at = 0;
  /// The vote left trust pinned at -10 (a like on a -10 feedback, or any
  /// later vote in the same session).
  bool override = false;

  bool operator==(const Vote&) const = default;
};

enum class SessionState { Submitted, Rejected, Voting, Finalized };

struct ReviewSession {
  std::string session_id;
  std::string user_id;
  std::string product_id;
  double appreciation = kMinAppreciation;
  std::string text;
  std::vector<std::string> selection;
  std::vector<Vote> votes;
  SessionState state = SessionState::Submitted;
  bool thin = false;
  Timestamp submitted_at = 0;

  bool has_vote_for(std::string_view feedback_id) const;
  bool serves(std::string_view feedback_id) const;
  /// Some vote in this session triggered the -10 override.
  bool pinned() const;
  /// Served feedback ids that have no vote yet, in selection order.
  std::vector<std::string> unvoted() const;

  bool operator==(const ReviewSession&) const = default;
};

std::string_view to_string(FeedbackCategory c);
std::string_view to_string(VoteChoice c);
std::string_view to_string(SessionState s);
/// Case-insensitive; throws Error(InvalidArgument) on unknown names.
FeedbackCategory parse_category(std::string_view name);
VoteChoice parse_choice(std::string_view name);
SessionState parse_state(std::string_view name);

/// A brand-new participant: trust 0, not blacklisted.
UserRecord new_user(std::string user_id, Timestamp now);

void check_identifier(std::string_view what, std::string_view id);
void check_appreciation(double appreciation);
void check_trust(std::string_view what, double value);
void check_selection_size(int k);

/// Throws Error(InvalidArgument) when a record breaks its invariants.
void validate(const UserRecord& user);
void validate(const FeedbackRecord& feedback);
void validate(const ProductAggregate& aggregate);

std::string_view trim(std::string_view s);

}  // namespace trs
