#include <doctest.h>

#include <cmath>
#include <sstream>

#include "simulator.hpp"

using namespace trs;

namespace {

ScenarioConfig honest_only(int rounds) {
  ScenarioConfig c;
  c.rng_seed = 17;
  c.rounds = rounds;
  c.products = {{"widget", 4.0}};
  c.agents = {{"h", AgentStrategy::Honest, 5}};
  return c;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    n += !line.empty();
  }
  return n;
}

std::string code_of(const std::string& json) {
  try {
    parse_scenario(json);
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST_CASE("zero rounds reports only the initial state") {
  const auto r = run_simulation(honest_only(0));
  CHECK(r.rounds.empty());
  CHECK(r.initial.round == 0);
  CHECK(r.initial.finalized == 0);
  REQUIRE(r.initial.groups.size() == 1);
  CHECK(r.initial.groups[0].mean_trust == 0.0);
}

TEST_CASE("runs are reproducible for a seed") {
  auto c = honest_only(10);
  c.agents.push_back({"r", AgentStrategy::Random, 2});
  CHECK(run_simulation(c) == run_simulation(c));
  auto other = c;
  other.rng_seed = 18;
  CHECK_FALSE(run_simulation(other) == run_simulation(c));
}

TEST_CASE("honest-only score lands near true quality") {
  const auto r = run_simulation(honest_only(200));
  REQUIRE(r.rounds.size() == 200);
  const auto& last = r.rounds.back().products.at(0);
  REQUIRE(last.score.has_value());
  CHECK(std::fabs(*last.score - 4.0) <= 0.5);
  CHECK(r.rounds.back().groups.at(0).mean_trust > 0.0);
}

TEST_CASE("output formats") {
  const auto r = run_simulation(honest_only(5));
  SUBCASE("table has a header plus one line per round") {
    CHECK(count_lines(emit_report(r, ReportFormat::Table)) == 6);
  }
  SUBCASE("csv starts with its header") {
    const auto csv = emit_report(r, ReportFormat::Csv);
    CHECK(csv.substr(0, csv.find('\n')) == kCsvHeader);
    CHECK(csv.find("\n5,score,widget,") != std::string::npos);
  }
  SUBCASE("json round-trips") {
    CHECK(parse_report_json(emit_report(r, ReportFormat::Json)) == r);
  }
  CHECK(parse_report_format("csv") == ReportFormat::Csv);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("scenario parsing") {
  const auto c = parse_scenario(R"({
    "rng_seed": 3, "rounds": 2, "k": 4,
    "products": [{"product_id": "a", "true_quality": 2.5}],
    "agents": [{"agent_id": "x", "strategy": "BadMouther", "count": 2}]
  })");
  CHECK(c.rng_seed == 3);
  CHECK(c.k == 4);
  CHECK(c.blacklist_ttl == kDefaultBlacklistTtl);
  CHECK(c.agents.at(0).strategy == AgentStrategy::BadMouther);

  const std::string base =
      R"("products": [{"product_id": "a", "true_quality": 3}],
         "agents": [{"agent_id": "x", "strategy": "Honest", "count": 1}])";
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1, )" + base + "}") == "none");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1, "bogus": 0, )" + base + "}") ==
        "invalid_config");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": -1, )" + base + "}") ==
        "invalid_config");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1, "k": 2, )" + base + "}") ==
        "invalid_config");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1, "products": [], "agents": []})") ==
        "invalid_config");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1,
      "products": [{"product_id": "a", "true_quality": 6}],
      "agents": [{"agent_id": "x", "strategy": "Honest", "count": 1}]})") ==
        "invalid_config");
  CHECK(code_of(R"({"rng_seed": 1, "rounds": 1,
      "products": [{"product_id": "a", "true_quality": 3}],
      "agents": [{"agent_id": "x", "strategy": "Sneaky", "count": 1}]})") ==
        "invalid_config");
  CHECK(code_of("[1, 2]") == "invalid_config");
  CHECK(code_of("{") == "invalid_config");
}

TEST_CASE("contradictory bots end at -10 and so do their fans") {
  ScenarioConfig c;
  c.rng_seed = 5;
  c.rounds = 30;
  c.products = {{"a", 2.0}, {"b", 4.0}};
  c.agents = {{"h", AgentStrategy::Honest, 4},
              {"cb", AgentStrategy::ContradictoryBot, 2},
              {"st", AgentStrategy::BallotStuffer, 1}};
  const auto r = run_simulation(c);
  CHECK(r.bot_feedbacks > 0);
  CHECK(r.bot_feedback_violations == 0);
  CHECK(r.contradictory_likes > 0);
  CHECK(r.contradictory_like_violations == 0);
}

TEST_CASE("batch oracle on a hand-built knowledge base") {
  Engine engine(Store(), default_lexicon());
  engine.create_user("seed", 0);
  for (int i = 0; i < 4; ++i) {
    engine.add_prefabricated("", "seed", "p", 4.0, "great screen", 9.5, i);
  }
  // One reviewer likes everything, the other dislikes everything and ends
  // with negative trust, so only the first counts.
  for (const auto& [user, choice] :
       {std::pair{"up", VoteChoice::Like}, {"down", VoteChoice::Dislike}}) {
    engine.create_user(user, 10);
    const auto s = engine.submit_review(user, "p", 4.0, "great screen", 4, 10);
    for (const auto& id : s.selection) {
      engine.process_vote(s.session_id, id, choice, 11);
    }
    engine.finalize_session(s.session_id, 12);
  }
  const auto batch =
      engine.read([](const Store& s) { return batch_product_scores(s); });
  REQUIRE(batch.at("p").has_value());
  CHECK(*batch.at("p") == doctest::Approx(4.0));
  CHECK(*engine.product_aggregate("p").score() == doctest::Approx(4.0));
}
