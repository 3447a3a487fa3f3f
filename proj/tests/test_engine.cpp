#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "engine.hpp"

using namespace trs;

namespace {

// Independent transcription of the band table, on integer tenths so that the
// band edges are exact.
double oracle_band(int tenths) {
  static const struct {
    int hi;
    double amount;
  } kBands[] = {{30, 0.25}, {50, 0.5}, {70, 0.75},
                {80, 1.0},  {90, 1.5}, {100, 2.0}};
  const int m = std::abs(tenths);
  for (const auto& b : kBands) {
    if (m <= b.hi) {
      return b.amount;
    }
  }
  return 0.0;
}

TrustAdjustment oracle(int tenths, VoteChoice choice) {
  if (tenths == -100 && choice == VoteChoice::Like) {
    return TrustAdjustment::override_to(-10.0);
  }
  if (tenths == 0) {
    return TrustAdjustment::delta(0.0);
  }
  const double d = oracle_band(tenths);
  const bool like = choice == VoteChoice::Like;
  if (tenths > 0) {
    return TrustAdjustment::delta(like ? d : -d);
  }
  return TrustAdjustment::delta(like ? -d : d);
}

constexpr Timestamp kT0 = 1'700'000'000;

const char* kPositive = "great screen. works well.";
const char* kNegative = "terrible battery.";
const char* kMixed = "great screen. terrible battery.";
const char* kContradictory = "battery is great. battery is terrible.";

struct Fixture {
  Engine engine{Store(), default_lexicon()};

  Fixture() { engine.create_user("seed", kT0); }

  std::string add(double trust, const char* text = kPositive,
                  const std::string& product = "p1", Timestamp at = kT0) {
    return engine
        .add_prefabricated("", "seed", product, 4.0, text, trust, at)
        .feedback_id;
  }
};

}  // namespace

TEST_CASE("anchor points") {
  CHECK(trust_adjustment(9.5, VoteChoice::Like) == TrustAdjustment::delta(2.0));
  CHECK(trust_adjustment(4.0, VoteChoice::Dislike) ==
        TrustAdjustment::delta(-0.5));
  CHECK(trust_adjustment(-2.0, VoteChoice::Dislike) ==
        TrustAdjustment::delta(0.25));
  CHECK(trust_adjustment(-10.0, VoteChoice::Like) ==
        TrustAdjustment::override_to(-10.0));
}

TEST_CASE("grid matches the oracle") {
  for (int i = -100; i <= 100; ++i) {
    for (auto choice : {VoteChoice::Like, VoteChoice::Dislike}) {
      CAPTURE(i);
      CHECK(trust_adjustment(i / 10.0, choice) == oracle(i, choice));
    }
  }
}

TEST_CASE("band edges are half-open") {
  CHECK(trust_adjustment(3.0, VoteChoice::Like).amount == 0.25);
  CHECK(trust_adjustment(std::nextafter(3.0, 4.0), VoteChoice::Like).amount ==
        0.5);
  CHECK(trust_adjustment(9.0, VoteChoice::Like).amount == 1.5);
  CHECK(trust_adjustment(std::nextafter(9.0, 10.0), VoteChoice::Like).amount ==
        2.0);
  CHECK(trust_adjustment(1e-9, VoteChoice::Like).amount == 0.25);
  CHECK(trust_adjustment(0.0, VoteChoice::Dislike).amount == 0.0);
  CHECK(trust_adjustment(-10.0, VoteChoice::Dislike) ==
        TrustAdjustment::delta(2.0));
}

TEST_CASE("out-of-range trustworthiness is rejected") {
  CHECK_THROWS_AS(trust_adjustment(10.01, VoteChoice::Like), Error);
  CHECK_THROWS_AS(trust_adjustment(-10.5, VoteChoice::Dislike), Error);
  CHECK_THROWS_AS(trust_adjustment(std::nan(""), VoteChoice::Like), Error);
}

TEST_CASE("property: sign symmetry and monotone magnitude") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (int n = 0; n < 5000; ++n) {
    const double ft = dist(rng);
    const auto like = trust_adjustment(ft, VoteChoice::Like);
    const auto dislike = trust_adjustment(ft, VoteChoice::Dislike);
    CHECK(like.amount == -dislike.amount);
    if (ft < 10.0) {
      CHECK(trust_adjustment(-ft, VoteChoice::Dislike) == like);
      CHECK(trust_adjustment(-ft, VoteChoice::Like) == dislike);
    }
    const double ft2 = dist(rng);
    const auto [lo, hi] = std::minmax(ft, ft2);
    CHECK(trust_adjustment(lo, VoteChoice::Like).amount <=
          trust_adjustment(hi, VoteChoice::Like).amount);
  }
}

TEST_CASE("apply_adjustment clamps and overrides") {
  CHECK(apply_adjustment(9.5, TrustAdjustment::delta(2)) == 10.0);
  CHECK(apply_adjustment(-9.9, TrustAdjustment::delta(-0.25)) == -10.0);
  CHECK(apply_adjustment(7.0, TrustAdjustment::override_to(-10)) == -10.0);
  CHECK(apply_adjustment(0.0, TrustAdjustment::delta(0.75)) == 0.75);
}

TEST_CASE("property: random vote walks stay within bounds") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> tenths(-100, 100);
  for (int walk = 0; walk < 500; ++walk) {
    double trust = 0.0;
    for (int step = 0; step < 200; ++step) {
      const auto choice = rng() % 2 == 0 ? VoteChoice::Like : VoteChoice::Dislike;
      trust = apply_adjustment(trust,
                               trust_adjustment(tenths(rng) / 10.0, choice));
      REQUIRE(trust >= -10.0);
      REQUIRE(trust <= 10.0);
    }
  }
}

TEST_CASE("reaching +10 takes five maximal rewards") {
  double trust = 0.0;
  int steps = 0;
  while (trust < 10.0) {
    trust = apply_adjustment(trust, trust_adjustment(10.0, VoteChoice::Like));
    ++steps;
  }
  CHECK(steps == 5);
}

TEST_CASE("worked aggregate point") {
  ProductAggregate agg{"p", 6.0, 2.0, 1};
  const auto u = update_product_score(agg, 5.0, 8.0);
  CHECK(u.included);
  CHECK(u.aggregate.weighted_sum == 46.0);
  CHECK(u.aggregate.coefficient_sum == 10.0);
  CHECK(*u.score == 4.6);
  CHECK(u.aggregate.rating_count == 2);
}

TEST_CASE("non-positive trust leaves the aggregate bit-identical") {
  ProductAggregate agg{"p", 12.345, 3.21, 3};
  for (double t : {0.0, -0.25, -10.0}) {
    const auto u = update_product_score(agg, 5.0, t);
    CHECK_FALSE(u.included);
    CHECK(u.aggregate == agg);
  }
  const auto first = update_product_score(ProductAggregate{"q"}, 2.0, 0.0);
  CHECK_FALSE(first.score.has_value());
}

TEST_CASE("property: incremental score equals the batch formula") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> y(1.0, 5.0);
  std::uniform_real_distribution<double> b(-10.0, 10.0);
  for (int seq = 0; seq < 200; ++seq) {
    ProductAggregate agg{"p"};
    long double num = 0, den = 0;
    for (int n = 0; n < 100; ++n) {
      const double yi = y(rng), bi = b(rng);
      agg = update_product_score(agg, yi, bi).aggregate;
      if (bi > 0) {
        num += static_cast<long double>(yi) * bi;
        den += bi;
      }
    }
    if (den > 0) {
      const double batch = static_cast<double>(num / den);
      CHECK(std::fabs(*agg.score() - batch) <= 1e-9 * batch);
    } else {
      CHECK_FALSE(agg.score().has_value());
    }
  }
}

TEST_CASE("fresh user session finalizes at 5.25") {
  Fixture fx;
  std::vector<std::string> served;
  for (double t : {9.5, 8.5, 7.5, 6.0}) {
    served.push_back(fx.add(t));
  }
  fx.engine.create_user("alice", kT0);
  const auto s =
      fx.engine.submit_review("alice", "p1", 5.0, kPositive, 4, kT0 + 10);
  REQUIRE(s.state == SessionState::Voting);
  CHECK(s.selection.size() == 4);
  CHECK_FALSE(s.thin);

  double expected = 0.0;
  const double deltas[] = {2.0, 1.5, 1.0, 0.75};
  for (std::size_t i = 0; i < s.selection.size(); ++i) {
    const auto v = fx.engine.process_vote(s.session_id, s.selection[i],
                                          VoteChoice::Like, kT0 + 20);
    const auto& f = fx.engine.read([&](const Store& st) -> FeedbackRecord {
      return st.feedback(s.selection[i]);
    });
    expected += oracle_band(static_cast<int>(std::lround(f.trustworthiness * 10)));
    CHECK(v.trust_after == expected);
  }
  CHECK(expected == deltas[0] + deltas[1] + deltas[2] + deltas[3]);

  const auto out = fx.engine.finalize_session(s.session_id, kT0 + 30);
  CHECK(out.final_trust == 5.25);
  CHECK(out.feedback_trustworthiness == 5.25);
  CHECK(out.score_included);
  CHECK(*out.new_product_score == 5.0);
  const auto agg = fx.engine.product_aggregate("p1");
  CHECK(agg.weighted_sum == 5.0 * 5.25);
  CHECK(agg.coefficient_sum == 5.25);
  CHECK(agg.rating_count == 1);
  const auto stored = fx.engine.read([&](const Store& st) {
    return st.feedback(out.feedback_id);
  });
  CHECK(stored.trustworthiness == 5.25);
  CHECK(stored.category == FeedbackCategory::Positive);
  CHECK(fx.engine.user_status("alice", kT0 + 30).user.trust_degree == 5.25);
}

TEST_CASE("discordant review blacklists for the ttl") {
  Fixture fx;
  for (int i = 0; i < 4; ++i) {
    fx.add(5.0);
  }
  fx.engine.create_user("bob", kT0);
  const auto s = fx.engine.submit_review("bob", "p1", 1.0, kPositive, 4, kT0);
  CHECK(s.state == SessionState::Rejected);
  CHECK(s.selection.empty());
  CHECK(fx.engine.user_status("bob", kT0).blacklisted);

  try {
    fx.engine.submit_review("bob", "p1", 5.0, kPositive, 4, kT0 + 100);
    FAIL("expected blacklisted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Blacklisted);
    CHECK(*e.retry_after_seconds() == kDefaultBlacklistTtl - 100);
  }
  CHECK(fx.engine.user_status("bob", kT0 + 86399).blacklisted);
  CHECK_FALSE(fx.engine.user_status("bob", kT0 + 86400).blacklisted);
  const auto again =
      fx.engine.submit_review("bob", "p1", 5.0, kPositive, 4, kT0 + 86400);
  CHECK(again.state == SessionState::Voting);
}

TEST_CASE("contradictory handling") {
  Fixture fx;
  const auto bad = fx.add(8.0, kContradictory);
  const auto stored =
      fx.engine.read([&](const Store& s) { return s.feedback(bad); });
  CHECK(stored.category == FeedbackCategory::Contradictory);
  CHECK(stored.trustworthiness == -10.0);
  for (int i = 0; i < 5; ++i) {
    fx.add(9.5);
  }

  fx.engine.create_user("carol", kT0);
  const auto s = fx.engine.submit_review("carol", "p1", 5.0, kPositive, 6, kT0);
  REQUIRE(s.serves(bad));
  // Earn some trust first, then like the contradictory one.
  for (const auto& id : s.selection) {
    if (id != bad) {
      fx.engine.process_vote(s.session_id, id, VoteChoice::Like, kT0 + 1);
    }
  }
  CHECK(fx.engine.user_status("carol", kT0).user.trust_degree == 10.0);
  const auto v =
      fx.engine.process_vote(s.session_id, bad, VoteChoice::Like, kT0 + 2);
  CHECK(v.adjustment.kind == TrustAdjustment::Kind::Override);
  CHECK(v.trust_after == -10.0);
  const auto out = fx.engine.finalize_session(s.session_id, kT0 + 3);
  CHECK(out.final_trust == -10.0);
  CHECK_FALSE(out.score_included);
  CHECK(fx.engine.product_aggregate("p1").rating_count == 0);
}

TEST_CASE("a like on a -10 feedback overrides only when it is contradictory") {
  FeedbackRecord f;
  f.trustworthiness = -10.0;
  f.category = FeedbackCategory::Positive;
  CHECK(trust_adjustment(f, VoteChoice::Like) == TrustAdjustment::delta(-2.0));
  CHECK(trust_adjustment(f, VoteChoice::Dislike) == TrustAdjustment::delta(2.0));
  f.category = FeedbackCategory::Contradictory;
  CHECK(trust_adjustment(f, VoteChoice::Like) ==
        TrustAdjustment::override_to(-10.0));
  CHECK(trust_adjustment(f, VoteChoice::Dislike) == TrustAdjustment::delta(2.0));
}

TEST_CASE("a -10 author's plain feedback does not pin the session") {
  Fixture fx;
  const auto low = fx.add(-10.0);
  for (int i = 0; i < 4; ++i) {
    fx.add(9.5, kPositive, "p1", kT0 + 1 + i);
  }
  fx.engine.create_user("gil", kT0);
  const auto s = fx.engine.submit_review("gil", "p1", 5.0, kPositive, 5, kT0 + 9);
  REQUIRE(s.serves(low));
  const auto v =
      fx.engine.process_vote(s.session_id, low, VoteChoice::Like, kT0 + 10);
  CHECK(v.adjustment == TrustAdjustment::delta(-2.0));
  CHECK(v.trust_after == -2.0);
  for (const auto& id : s.selection) {
    if (id != low) {
      fx.engine.process_vote(s.session_id, id, VoteChoice::Like, kT0 + 10);
    }
  }
  const auto out = fx.engine.finalize_session(s.session_id, kT0 + 11);
  CHECK(out.final_trust == 6.0);
  CHECK(out.score_included);
}

TEST_CASE("votes after an override stay pinned at -10") {
  Fixture fx;
  const auto bad = fx.add(8.0, kContradictory);
  for (int i = 0; i < 5; ++i) {
    fx.add(9.5, kPositive, "p1", kT0 + 1 + i);
  }
  fx.engine.create_user("hal", kT0);
  const auto s = fx.engine.submit_review("hal", "p1", 5.0, kPositive, 6, kT0 + 9);
  REQUIRE(s.serves(bad));
  CHECK(fx.engine.process_vote(s.session_id, bad, VoteChoice::Like, kT0 + 10)
            .trust_after == -10.0);
  for (const auto& id : s.selection) {
    if (id != bad) {
      const auto v =
          fx.engine.process_vote(s.session_id, id, VoteChoice::Like, kT0 + 10);
      CHECK(v.adjustment.kind == TrustAdjustment::Kind::Override);
      CHECK(v.trust_after == -10.0);
    }
  }
  CHECK(fx.engine.read([&](const Store& st) {
    return st.session(s.session_id).pinned();
  }));
  const auto out = fx.engine.finalize_session(s.session_id, kT0 + 11);
  CHECK(out.final_trust == -10.0);
  CHECK_FALSE(out.score_included);
}

TEST_CASE("a contradictory review is rejected at the gate") {
  Fixture fx;
  fx.engine.create_user("dan", kT0);
  for (double a : {1.0, 3.0, 5.0}) {
    fx.engine.create_user("dan" + std::to_string(int(a)), kT0);
    const auto s = fx.engine.submit_review("dan" + std::to_string(int(a)),
                                           "p1", a, kContradictory, 4, kT0);
    CHECK(s.state == SessionState::Rejected);
  }
}

TEST_CASE("vote and finalize errors") {
  Fixture fx;
  const auto other = fx.add(5.0, kPositive, "p2");
  for (int i = 0; i < 4; ++i) {
    fx.add(5.0);
  }
  fx.engine.create_user("eve", kT0);
  const auto s = fx.engine.submit_review("eve", "p1", 3.0, kMixed, 4, kT0);
  REQUIRE(s.state == SessionState::Voting);

  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code_of([&] {
          fx.engine.process_vote(s.session_id, other, VoteChoice::Like, kT0);
        }) == "feedback_not_in_selection");
  CHECK(code_of([&] { fx.engine.finalize_session(s.session_id, kT0); }) ==
        "incomplete_votes");
  fx.engine.process_vote(s.session_id, s.selection[0], VoteChoice::Dislike,
                         kT0);
  CHECK(code_of([&] {
          fx.engine.process_vote(s.session_id, s.selection[0],
                                 VoteChoice::Like, kT0);
        }) == "duplicate_vote");
  CHECK(code_of([&] {
          fx.engine.process_vote("nope", s.selection[0], VoteChoice::Like, kT0);
        }) == "unknown_session");
  for (std::size_t i = 1; i < s.selection.size(); ++i) {
    fx.engine.process_vote(s.session_id, s.selection[i], VoteChoice::Dislike,
                           kT0);
  }
  fx.engine.finalize_session(s.session_id, kT0);
  CHECK(code_of([&] { fx.engine.finalize_session(s.session_id, kT0); }) ==
        "session_state");
  CHECK(code_of([&] {
          fx.engine.process_vote(s.session_id, s.selection[0],
                                 VoteChoice::Like, kT0);
        }) == "session_state");
  CHECK(code_of([&] {
          fx.engine.submit_review("eve", "p1", 3.0, kMixed, 3, kT0);
        }) == "invalid_k");
  CHECK(code_of([&] {
          fx.engine.submit_review("ghost", "p1", 3.0, kMixed, 4, kT0);
        }) == "unknown_user");
  CHECK(code_of([&] { fx.engine.submit_review("eve", "p1", 3.0, "", 4, kT0); }) ==
        "empty_text");
}

TEST_CASE("thin selection and empty sessions") {
  Fixture fx;
  fx.add(5.0);
  fx.engine.create_user("fay", kT0);
  const auto s = fx.engine.submit_review("fay", "p1", 5.0, kPositive, 4, kT0);
  CHECK(s.thin);
  CHECK(s.selection.size() == 1);

  const auto empty =
      fx.engine.submit_review("fay", "fresh", 5.0, kPositive, 4, kT0);
  CHECK(empty.thin);
  CHECK(empty.selection.empty());
  // Nothing to vote on: finalizes straight away with trust 0, not included.
  const auto out = fx.engine.finalize_session(empty.session_id, kT0);
  CHECK_FALSE(out.score_included);
  CHECK_FALSE(fx.engine.product_aggregate("fresh").score().has_value());
}

TEST_CASE("earlier feedbacks follow the author's trust") {
  Fixture fx;
  for (double t : {9.5, 9.5}) {
    fx.add(t);
  }
  fx.engine.create_user("gus", kT0);
  for (int round = 0; round < 2; ++round) {
    const auto s =
        fx.engine.submit_review("gus", "p1", 4.0, kPositive, 4, kT0 + round);
    for (const auto& id : s.selection) {
      fx.engine.process_vote(s.session_id, id, VoteChoice::Like, kT0 + round);
    }
    fx.engine.finalize_session(s.session_id, kT0 + round);
  }
  const auto trust = fx.engine.user_status("gus", kT0).user.trust_degree;
  CHECK(trust == 8.0);
  const auto mine = fx.engine.read(
      [](const Store& s) { return s.feedbacks_by_author("gus"); });
  REQUIRE(mine.size() == 2);
  for (const auto& f : mine) {
    CHECK(f.trustworthiness == trust);
  }
}

TEST_CASE("journal replay reproduces the live store at every prefix") {
  Fixture fx;
  for (int i = 0; i < 6; ++i) {
    fx.add(2.0 + i, i % 2 == 0 ? kPositive : kNegative);
  }
  fx.add(3.0, kContradictory);
  for (int u = 0; u < 4; ++u) {
    const auto uid = "u" + std::to_string(u);
    fx.engine.create_user(uid, kT0);
    const auto s = fx.engine.submit_review(uid, "p1", u == 3 ? 1.0 : 4.0,
                                           kPositive, 4, kT0 + u);
    for (const auto& id : s.selection) {
      fx.engine.process_vote(s.session_id, id,
                             u % 2 ? VoteChoice::Dislike : VoteChoice::Like,
                             kT0 + u);
    }
    if (s.state == SessionState::Voting) {
      fx.engine.finalize_session(s.session_id, kT0 + u);
    }
  }
  const auto journal =
      fx.engine.read([](const Store& s) { return s.journal_text(); });
  const auto live = fx.engine.read([](const Store& s) {
    return Store::replay(s.journal_text());
  });
  fx.engine.read([&](const Store& s) {
    CHECK(live == s);
    return 0;
  });

  std::istringstream in(journal);
  std::string line, prefix;
  while (std::getline(in, line)) {
    prefix += line + "\n";
    const auto partial = Store::replay(prefix);
    for (const auto& [id, session] : partial.sessions()) {
      if (session.state == SessionState::Finalized) {
        CHECK(partial.find_feedback("fb-" + id) != nullptr);
      }
      if (session.state == SessionState::Rejected) {
        CHECK(partial.user(session.user_id).blacklist_until.has_value());
      }
    }
    for (const auto& [id, f] : partial.feedbacks()) {
      if (id.rfind("fb-", 0) == 0) {
        CHECK(partial.session(id.substr(3)).state == SessionState::Finalized);
      }
    }
  }
}
