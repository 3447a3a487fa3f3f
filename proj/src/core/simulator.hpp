// Agent-based robustness harness. Populations of honest and adversarial
// agents review synthetic products through the real engine; the report tracks
// product score error, mean trust per strategy and blacklist pressure.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "engine.hpp"

namespace trs {

enum class AgentStrategy {
  Honest,
  Random,
  BallotStuffer,
  BadMouther,
  ContradictoryBot,
};

std::string_view to_string(AgentStrategy s);
AgentStrategy parse_strategy(std::string_view name);

struct ProductSpec {
  std::string product_id;
  double true_quality = 3.0;
  bool operator==(const ProductSpec&) const = default;
};

struct AgentGroup {
  std::string agent_id;
  AgentStrategy strategy = AgentStrategy::Honest;
  int count = 1;
  bool operator==(const AgentGroup&) const = default;
};

struct ScenarioConfig {
  std::uint64_t rng_seed = 0;
  int rounds = 0;
  std::vector<ProductSpec> products;
  std::vector<AgentGroup> agents;
  int k = kDefaultSelection;
  std::int64_t blacklist_ttl = kDefaultBlacklistTtl;
  bool operator==(const ScenarioConfig&) const = default;
};

/// JSON document whose keys mirror ScenarioConfig; `k` and `blacklist_ttl`
/// are optional. Throws Error("invalid_config").
ScenarioConfig parse_scenario(std::string_view json_text);
void validate(const ScenarioConfig& config);

struct ProductRound {
  std::string product_id;
  std::optional<double> score;
  std::optional<double> abs_error;
  std::uint64_t rating_count = 0;
  bool operator==(const ProductRound&) const = default;
};

struct GroupRound {
  AgentStrategy strategy = AgentStrategy::Honest;
  int agents = 0;
  double mean_trust = 0.0;
  int blacklisted = 0;
  bool operator==(const GroupRound&) const = default;
};

struct RoundStats {
  int round = 0;
  std::vector<ProductRound> products;
  std::vector<GroupRound> groups;
  int blacklisted = 0;
  int finalized = 0;
  int rejected = 0;
  bool operator==(const RoundStats&) const = default;
};

/// Forward-only accumulation versus a batch recompute that reweights every
/// included rating by its author's final trust.
struct DriftEntry {
  std::string product_id;
  std::optional<double> incremental;
  std::optional<double> batch;
  std::optional<double> drift;
  bool operator==(const DriftEntry&) const = default;
};

struct SimulationReport {
  std::uint64_t rng_seed = 0;
  RoundStats initial;
  std::vector<RoundStats> rounds;
  std::vector<DriftEntry> drift;
  /// Likes cast on Contradictory feedbacks, and how many of those did not
  /// end at -10.
  std::uint64_t contradictory_likes = 0;
  std::uint64_t contradictory_like_violations = 0;
  /// Feedbacks authored by ContradictoryBot agents, and how many of those
  /// classified Contradictory are not at -10.
  std::uint64_t bot_feedbacks = 0;
  std::uint64_t bot_feedback_violations = 0;
  bool operator==(const SimulationReport&) const = default;
};

/// Batch oracle: per product, sum(Y*t)/sum(t) over finalized sessions whose
/// author's current trust t is positive. Absent when no such session exists.
std::map<std::string, std::optional<double>> batch_product_scores(
    const Store& store);

class Simulation {
 public:
  explicit Simulation(ScenarioConfig config,
                      const Lexicon& lexicon = default_lexicon());

  SimulationReport run();

  const Engine& engine() const { return engine_; }
  const ScenarioConfig& config() const { return config_; }
  /// Agent user ids grouped by strategy.
  const std::map<AgentStrategy, std::vector<std::string>>& agents() const {
    return agents_;
  }

 private:
  struct Vocabulary {
    std::vector<std::string> positive;
    std::vector<std::string> negative;
    std::vector<std::string> aspects;
  };

  double uniform01();
  std::size_t uniform_index(std::size_t n);
  double uniform(double lo, double hi);

  std::string text_for(FeedbackCategory category);
  const ProductSpec& product_for(AgentStrategy strategy);
  bool honest_likes(const FeedbackRecord& feedback, double true_quality);
  VoteChoice choose_vote(AgentStrategy strategy, const FeedbackRecord& feedback,
                         double true_quality);
  void seed_knowledge_base();
  void take_turn(const std::string& user_id, AgentStrategy strategy,
                 RoundStats& stats);
  RoundStats snapshot(int round) const;
  std::vector<DriftEntry> measure_drift() const;

  ScenarioConfig config_;
  Engine engine_;
  Vocabulary vocab_;
  std::mt19937_64 rng_;
  Timestamp clock_;
  std::map<AgentStrategy, std::vector<std::string>> agents_;
  std::map<std::string, double> polarity_cache_;
  SimulationReport report_;
};

SimulationReport run_simulation(const ScenarioConfig& config);

enum class ReportFormat { Table, Csv, Json };

ReportFormat parse_report_format(std::string_view name);
std::string emit_report(const SimulationReport& report, ReportFormat format);
/// Inverse of the json format.
SimulationReport parse_report_json(std::string_view text);

/// Header of the csv format (long layout: one metric per row).
inline constexpr std::string_view kCsvHeader = "round,metric,key,value";

}  // namespace trs
