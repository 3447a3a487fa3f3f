#include "domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace trs {

Error::Error(ErrorKind kind, std::string code, const std::string& message,
             std::optional<std::int64_t> retry_after_seconds)
    : std::runtime_error(message),
      kind_(kind),
      code_(std::move(code)),
      retry_after_(retry_after_seconds) {}

std::optional<double> ProductAggregate::score() const {
  if (rating_count == 0) {
    return std::nullopt;
  }
  return weighted_sum / coefficient_sum;
}

bool ReviewSession::has_vote_for(std::string_view feedback_id) const {
  return std::any_of(votes.begin(), votes.end(), [&](const Vote& v) {
    return v.feedback_id == feedback_id;
  });
}

bool ReviewSession::serves(std::string_view feedback_id) const {
  return std::find(selection.begin(), selection.end(), feedback_id) !=
         selection.end();
}

bool ReviewSession::pinned() const {
  return std::any_of(votes.begin(), votes.end(),
                     [](const Vote& v) { return v.override; });
}

std::vector<std::string> ReviewSession::unvoted() const {
  std::vector<std::string> out;
  for (const auto& id : selection) {
    if (!has_vote_for(id)) {
      out.push_back(id);
    }
  }
  return out;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

[[noreturn]] void invalid(std::string code, const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, std::move(code), message);
}

}  // namespace

std::string_view to_string(FeedbackCategory c) {
  switch (c) {
    case FeedbackCategory::Positive:
      return "Positive";
    case FeedbackCategory::Negative:
      return "Negative";
    case FeedbackCategory::Mitigated:
      return "Mitigated";
    case FeedbackCategory::Contradictory:
      return "Contradictory";
  }
  return "?";
}

std::string_view to_string(VoteChoice c) {
  return c == VoteChoice::Like ? "Like" : "Dislike";
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Submitted:
      return "Submitted";
    case SessionState::Rejected:
      return "Rejected";
    case SessionState::Voting:
      return "Voting";
    case SessionState::Finalized:
      return "Finalized";
  }
  return "?";
}

FeedbackCategory parse_category(std::string_view name) {
  for (auto c : kAllCategories) {
    if (iequals(name, to_string(c))) {
      return c;
    }
  }
  invalid("invalid_category", "unknown feedback category '" +
                                  std::string(name) + "'");
}

VoteChoice parse_choice(std::string_view name) {
  if (iequals(name, "like")) {
    return VoteChoice::Like;
  }
  if (iequals(name, "dislike")) {
    return VoteChoice::Dislike;
  }
  invalid("invalid_choice",
          "vote choice must be Like or Dislike, got '" + std::string(name) +
              "'");
}

SessionState parse_state(std::string_view name) {
  for (auto s : {SessionState::Submitted, SessionState::Rejected,
                 SessionState::Voting, SessionState::Finalized}) {
    if (iequals(name, to_string(s))) {
      return s;
    }
  }
  invalid("invalid_state", "unknown session state '" + std::string(name) + "'");
}

UserRecord new_user(std::string user_id, Timestamp now) {
  check_identifier("user_id", user_id);
  UserRecord u;
  u.user_id = std::move(user_id);
  u.trust_degree = kInitialTrust;
  u.created_at = now;
  return u;
}

void check_identifier(std::string_view what, std::string_view id) {
  if (trim(id).empty()) {
    invalid("invalid_id", std::string(what) + " must be a non-empty string");
  }
}

void check_appreciation(double appreciation) {
  if (!std::isfinite(appreciation) || appreciation < kMinAppreciation ||
      appreciation > kMaxAppreciation) {
    invalid("invalid_appreciation",
            "appreciation must lie in [1,5], got " +
                std::to_string(appreciation));
  }
}

void check_trust(std::string_view what, double value) {
  if (!std::isfinite(value) || value < kMinTrust || value > kMaxTrust) {
    invalid("invalid_trust", std::string(what) + " must lie in [-10,10], got " +
                                 std::to_string(value));
  }
}

void check_selection_size(int k) {
  if (k < kMinSelection || k > kMaxSelection) {
    invalid("invalid_k",
            "selection size must lie in [4,10], got " + std::to_string(k));
  }
}

void validate(const UserRecord& user) {
  check_identifier("user_id", user.user_id);
  check_trust("trust_degree", user.trust_degree);
  if (user.blacklist_until && *user.blacklist_until < user.created_at) {
    invalid("invalid_blacklist", "blacklist_until precedes created_at for '" +
                                     user.user_id + "'");
  }
}

void validate(const FeedbackRecord& feedback) {
  check_identifier("feedback_id", feedback.feedback_id);
  check_identifier("product_id", feedback.product_id);
  check_identifier("author_id", feedback.author_id);
  if (trim(feedback.text).empty()) {
    invalid("empty_text", "feedback text must not be empty");
  }
  check_trust("trustworthiness", feedback.trustworthiness);
  check_appreciation(feedback.appreciation);
  if (feedback.category == FeedbackCategory::Contradictory &&
      feedback.trustworthiness != kMinTrust) {
    invalid("invalid_trust",
            "a Contradictory feedback must carry trustworthiness -10");
  }
}

void validate(const ProductAggregate& aggregate) {
  check_identifier("product_id", aggregate.product_id);
  if (aggregate.rating_count == 0) {
    if (aggregate.weighted_sum != 0.0 || aggregate.coefficient_sum != 0.0) {
      invalid("invalid_aggregate", "an unrated aggregate must have zero sums");
    }
  } else if (!(aggregate.coefficient_sum > 0.0) ||
             !std::isfinite(aggregate.weighted_sum)) {
    invalid("invalid_aggregate",
            "a rated aggregate needs a positive coefficient sum");
  }
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!s.empty() && is_space(s.front())) {
    s.remove_prefix(1);
  }
  while (!s.empty() && is_space(s.back())) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace trs
