#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace trs {

namespace {

double band_delta(double magnitude) {
  if (magnitude <= 3.0) {
    return 0.25;
  }
  if (magnitude <= 5.0) {
    return 0.5;
  }
  if (magnitude <= 7.0) {
    return 0.75;
  }
  if (magnitude <= 8.0) {
    return 1.0;
  }
  if (magnitude <= 9.0) {
    return 1.5;
  }
  return 2.0;
}

template <class Map>
std::string next_free_id(const Map& taken, const std::string& prefix,
                         std::size_t hint) {
  std::string id = prefix + std::to_string(hint);
  while (taken.count(id) != 0) {
    id = prefix + std::to_string(++hint);
  }
  return id;
}

}  // namespace

TrustAdjustment trust_adjustment(double feedtrustworth, VoteChoice choice) {
  check_trust("feedtrustworth", feedtrustworth);
  if (feedtrustworth == kMinTrust && choice == VoteChoice::Like) {
    return TrustAdjustment::override_to(kMinTrust);
  }
  if (feedtrustworth == 0.0) {
    return TrustAdjustment::delta(0.0);
  }
  const double d = band_delta(std::fabs(feedtrustworth));
  const bool aligned = (choice == VoteChoice::Like) == (feedtrustworth > 0.0);
  return TrustAdjustment::delta(aligned ? d : -d);
}

TrustAdjustment trust_adjustment(const FeedbackRecord& feedback,
                                 VoteChoice choice) {
  const auto adj = trust_adjustment(feedback.trustworthiness, choice);
  if (adj.kind == TrustAdjustment::Kind::Override &&
      feedback.category != FeedbackCategory::Contradictory) {
    return TrustAdjustment::delta(-band_delta(kMaxTrust));
  }
  return adj;
}

double apply_adjustment(double trust_before, const TrustAdjustment& adj) {
  if (adj.kind == TrustAdjustment::Kind::Override) {
    return adj.amount;
  }
  return std::clamp(trust_before + adj.amount, kMinTrust, kMaxTrust);
}

ScoreUpdate update_product_score(const ProductAggregate& aggregate,
                                 double appreciation, double trust) {
  check_appreciation(appreciation);
  check_trust("trust", trust);
  ScoreUpdate out{aggregate, aggregate.score(), false};
  if (trust <= 0.0) {
    return out;
  }
  out.aggregate.weighted_sum += appreciation * trust;
  out.aggregate.coefficient_sum += trust;
  out.aggregate.rating_count += 1;
  out.score = out.aggregate.score();
  out.included = true;
  return out;
}

Engine::Engine(Store store, Lexicon lexicon, EngineConfig config)
    : store_(std::move(store)),
      lexicon_(std::move(lexicon)),
      config_(config) {
  if (config_.blacklist_ttl <= 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid_ttl",
                "blacklist ttl must be positive");
  }
  check_selection_size(config_.default_k);
}

UserRecord Engine::create_user(const std::string& user_id, Timestamp now) {
  std::unique_lock lock(mutex_);
  return store_.create_user(user_id, now);
}

FeedbackRecord Engine::add_prefabricated(std::string feedback_id,
                                         const std::string& author_id,
                                         const std::string& product_id,
                                         double appreciation,
                                         const std::string& text,
                                         std::optional<double> trustworthiness,
                                         Timestamp now) {
  std::unique_lock lock(mutex_);
  const auto& author = store_.user(author_id);
  check_identifier("product_id", product_id);
  check_appreciation(appreciation);

  FeedbackRecord record;
  record.category = classify_feedback(text, lexicon_);
  record.trustworthiness = record.category == FeedbackCategory::Contradictory
                               ? kMinTrust
                               : trustworthiness.value_or(author.trust_degree);
  if (feedback_id.empty()) {
    feedback_id =
        next_free_id(store_.feedbacks(), "f", store_.feedbacks().size() + 1);
  }
  record.feedback_id = std::move(feedback_id);
  record.product_id = product_id;
  record.author_id = author_id;
  record.text = text;
  record.created_at = now;
  record.appreciation = appreciation;
  store_.store_feedback(record);
  return record;
}

ReviewSession Engine::submit_review(const std::string& user_id,
                                    const std::string& product_id,
                                    double appreciation,
                                    const std::string& text,
                                    std::optional<int> k, Timestamp now) {
  std::unique_lock lock(mutex_);
  const auto& user = store_.user(user_id);
  if (store_.is_blacklisted(user_id, now)) {
    const auto remaining = *user.blacklist_until - now;
    throw Error(ErrorKind::Blacklisted, "blacklisted",
                "user '" + user_id + "' is blacklisted for another " +
                    std::to_string(remaining) + " s",
                remaining);
  }
  check_identifier("product_id", product_id);
  check_appreciation(appreciation);
  const int size = k.value_or(config_.default_k);
  check_selection_size(size);
  const auto category = classify_feedback(text, lexicon_);

  ReviewSession session;
  session.session_id =
      next_free_id(store_.sessions(), "s", store_.sessions().size() + 1);
  session.user_id = user_id;
  session.product_id = product_id;
  session.appreciation = appreciation;
  session.text = text;
  session.submitted_at = now;

  if (!is_concordant(appreciation, category)) {
    session.state = SessionState::Rejected;
    store_.commit({BlacklistChange{user_id, now + config_.blacklist_ttl},
                   SessionChange{session}},
                  session.session_id);
    return session;
  }

  const auto selection = store_.select_prefabricated(product_id, size, user_id);
  for (const auto& f : selection.feedbacks) {
    session.selection.push_back(f.feedback_id);
  }
  session.thin = selection.thin;
  session.state = SessionState::Voting;
  store_.commit({SessionChange{session}});
  return session;
}

VoteOutcome Engine::process_vote(const std::string& session_id,
                                 const std::string& feedback_id,
                                 VoteChoice choice, Timestamp now) {
  std::unique_lock lock(mutex_);
  const auto& session = store_.session(session_id);
  if (session.state != SessionState::Voting) {
    throw Error(ErrorKind::Conflict, "session_state",
                "session '" + session_id + "' is " +
                    std::string(to_string(session.state)) +
                    ", not accepting votes");
  }
  const auto& feedback = store_.feedback(feedback_id);
  if (!session.serves(feedback_id)) {
    throw Error(ErrorKind::Conflict, "feedback_not_in_selection",
                "feedback '" + feedback_id + "' was not served in session '" +
                    session_id + "'");
  }
  if (session.has_vote_for(feedback_id)) {
    throw Error(ErrorKind::Conflict, "duplicate_vote",
                "feedback '" + feedback_id + "' already voted in session '" +
                    session_id + "'");
  }

  VoteOutcome out;
  out.session_id = session_id;
  out.user_id = session.user_id;
  out.feedback_id = feedback_id;
  out.choice = choice;
  out.feedtrustworth = feedback.trustworthiness;
  out.trust_before = store_.user(session.user_id).trust_degree;
  out.adjustment = trust_adjustment(feedback, choice);
  // Once a like on a -10 feedback fired, the rest of the session stays there.
  if (session.pinned()) {
    out.adjustment = TrustAdjustment::override_to(kMinTrust);
  }
  out.trust_after = apply_adjustment(out.trust_before, out.adjustment);

  const bool overridden = out.adjustment.kind == TrustAdjustment::Kind::Override;
  store_.commit({VoteChange{
      session_id, Vote{session.user_id, feedback_id, choice, now, overridden},
      out.trust_after}});
  return out;
}

SessionOutcome Engine::finalize_session(const std::string& session_id,
                                        Timestamp now) {
  std::unique_lock lock(mutex_);
  auto session = store_.session(session_id);
  if (session.state != SessionState::Voting) {
    throw Error(ErrorKind::Conflict, "session_state",
                "session '" + session_id + "' is " +
                    std::string(to_string(session.state)) +
                    ", cannot finalize");
  }
  if (const auto missing = session.unvoted(); !missing.empty()) {
    std::string list;
    for (const auto& id : missing) {
      list += (list.empty() ? "" : ", ") + id;
    }
    throw Error(ErrorKind::Conflict, "incomplete_votes",
                "session '" + session_id + "' has unvoted feedbacks: " + list);
  }

  SessionOutcome out;
  out.session_id = session_id;
  out.final_trust = store_.user(session.user_id).trust_degree;
  out.category = classify_feedback(session.text, lexicon_);
  out.feedback_trustworthiness =
      out.category == FeedbackCategory::Contradictory ? kMinTrust
                                                      : out.final_trust;

  std::vector<Change> changes;
  // The author's earlier feedbacks follow the new trust degree.
  for (auto prior : store_.feedbacks_by_author(session.user_id)) {
    if (prior.category == FeedbackCategory::Contradictory ||
        prior.trustworthiness == out.final_trust) {
      continue;
    }
    prior.trustworthiness = out.final_trust;
    changes.push_back(FeedbackChange{std::move(prior)});
  }

  FeedbackRecord own;
  own.feedback_id = "fb-" + session_id;
  for (int n = 2; store_.find_feedback(own.feedback_id) != nullptr; ++n) {
    own.feedback_id = "fb-" + session_id + "-" + std::to_string(n);
  }
  own.product_id = session.product_id;
  own.author_id = session.user_id;
  own.text = session.text;
  own.category = out.category;
  own.trustworthiness = out.feedback_trustworthiness;
  own.created_at = now;
  own.appreciation = session.appreciation;
  out.feedback_id = own.feedback_id;
  changes.push_back(FeedbackChange{std::move(own)});

  const auto update = update_product_score(
      store_.aggregate(session.product_id), session.appreciation,
      out.final_trust);
  out.score_included = update.included;
  out.new_product_score = update.score;
  out.rating_count = update.aggregate.rating_count;
  if (update.included) {
    changes.push_back(AggregateChange{update.aggregate});
  }

  session.state = SessionState::Finalized;
  changes.push_back(SessionChange{std::move(session)});
  store_.commit(std::move(changes), session_id);
  return out;
}

UserStatus Engine::user_status(const std::string& user_id,
                               Timestamp now) const {
  std::shared_lock lock(mutex_);
  UserStatus status;
  status.user = store_.user(user_id);
  status.blacklisted = store_.is_blacklisted(user_id, now);
  if (status.blacklisted) {
    status.retry_after_seconds = *status.user.blacklist_until - now;
  }
  return status;
}

ProductAggregate Engine::product_aggregate(const std::string& product_id) const {
  std::shared_lock lock(mutex_);
  return store_.aggregate(product_id);
}

std::vector<FeedbackRecord> Engine::product_feedbacks(
    const std::string& product_id,
    std::optional<FeedbackCategory> category) const {
  std::shared_lock lock(mutex_);
  return store_.feedbacks_for(product_id, category);
}

ReviewSession Engine::session(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  return store_.session(session_id);
}

}  // namespace trs
