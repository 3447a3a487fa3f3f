#include "simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace trs {

using nlohmann::json;

namespace {

constexpr Timestamp kEpoch = 1'700'000'000;
constexpr Timestamp kRoundSeconds = 3600;
constexpr const char* kCurator = "kb-curator";
constexpr double kSeedTrust = 6.0;
constexpr int kSeedsPerCategory = 2;
constexpr int kLeaningAttempts = 32;
constexpr double kVocabularyWeight = 0.4;

[[noreturn]] void bad_config(const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, "invalid_config", message);
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

std::string number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

json round_json(const RoundStats& r) {
  json products = json::array();
  for (const auto& p : r.products) {
    products.push_back({{"product_id", p.product_id},
                        {"score", optional_number(p.score)},
                        {"abs_error", optional_number(p.abs_error)},
                        {"rating_count", p.rating_count}});
  }
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"strategy", to_string(g.strategy)},
                      {"agents", g.agents},
                      {"mean_trust", g.mean_trust},
                      {"blacklisted", g.blacklisted}});
  }
  return {{"round", r.round},
          {"products", std::move(products)},
          {"groups", std::move(groups)},
          {"blacklisted", r.blacklisted},
          {"finalized", r.finalized},
          {"rejected", r.rejected}};
}

RoundStats round_from_json(const json& j) {
  RoundStats r;
  r.round = j.at("round").get<int>();
  for (const auto& p : j.at("products")) {
    r.products.push_back({p.at("product_id").get<std::string>(),
                          read_optional(p, "score"),
                          read_optional(p, "abs_error"),
                          p.at("rating_count").get<std::uint64_t>()});
  }
  for (const auto& g : j.at("groups")) {
    r.groups.push_back({parse_strategy(g.at("strategy").get<std::string>()),
                        g.at("agents").get<int>(),
                        g.at("mean_trust").get<double>(),
                        g.at("blacklisted").get<int>()});
  }
  r.blacklisted = j.at("blacklisted").get<int>();
  r.finalized = j.at("finalized").get<int>();
  r.rejected = j.at("rejected").get<int>();
  return r;
}

void csv_row(std::string& out, int round, std::string_view metric,
             std::string_view key, std::string_view value) {
  out += std::to_string(round);
  out += ',';
  out += metric;
  out += ',';
  out += key;
  out += ',';
  out += value;
  out += '\n';
}

void csv_round(std::string& out, const RoundStats& r) {
  for (const auto& p : r.products) {
    csv_row(out, r.round, "score", p.product_id,
            p.score ? number(*p.score) : "unrated");
    csv_row(out, r.round, "abs_error", p.product_id,
            p.abs_error ? number(*p.abs_error) : "");
    csv_row(out, r.round, "rating_count", p.product_id,
            std::to_string(p.rating_count));
  }
  for (const auto& g : r.groups) {
    csv_row(out, r.round, "mean_trust", to_string(g.strategy),
            number(g.mean_trust));
    csv_row(out, r.round, "blacklisted", to_string(g.strategy),
            std::to_string(g.blacklisted));
  }
  csv_row(out, r.round, "blacklisted_total", "", std::to_string(r.blacklisted));
  csv_row(out, r.round, "finalized", "", std::to_string(r.finalized));
  csv_row(out, r.round, "rejected", "", std::to_string(r.rejected));
}

std::string format_cell(const std::optional<double>& v, int width) {
  char buf[48];
  if (v) {
    std::snprintf(buf, sizeof(buf), "%*.3f", width, *v);
  } else {
    std::snprintf(buf, sizeof(buf), "%*s", width, "-");
  }
  return buf;
}

std::string format_header(const std::string& label, int width) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%*s", width, label.c_str());
  return buf;
}

}  // namespace

std::string_view to_string(AgentStrategy s) {
  switch (s) {
    case AgentStrategy::Honest:
      return "Honest";
    case AgentStrategy::Random:
      return "Random";
    case AgentStrategy::BallotStuffer:
      return "BallotStuffer";
    case AgentStrategy::BadMouther:
      return "BadMouther";
    case AgentStrategy::ContradictoryBot:
      return "ContradictoryBot";
  }
  return "?";
}

AgentStrategy parse_strategy(std::string_view name) {
  for (auto s : {AgentStrategy::Honest, AgentStrategy::Random,
                 AgentStrategy::BallotStuffer, AgentStrategy::BadMouther,
                 AgentStrategy::ContradictoryBot}) {
    if (name == to_string(s)) {
      return s;
    }
  }
  bad_config("unknown strategy '" + std::string(name) + "'");
}

void validate(const ScenarioConfig& config) {
  if (config.rounds < 0) {
    bad_config("rounds must be non-negative");
  }
  if (config.products.empty()) {
    bad_config("at least one product is required");
  }
  std::set<std::string> product_ids;
  for (const auto& p : config.products) {
    if (trim(p.product_id).empty() || !product_ids.insert(p.product_id).second) {
      bad_config("product ids must be non-empty and unique");
    }
    if (!(p.true_quality >= kMinAppreciation &&
          p.true_quality <= kMaxAppreciation)) {
      bad_config("true_quality of '" + p.product_id + "' must lie in [1,5]");
    }
  }
  if (config.agents.empty()) {
    bad_config("at least one agent group is required");
  }
  std::set<std::string> agent_ids;
  for (const auto& a : config.agents) {
    if (trim(a.agent_id).empty() || !agent_ids.insert(a.agent_id).second) {
      bad_config("agent ids must be non-empty and unique");
    }
    if (a.count <= 0) {
      bad_config("count of '" + a.agent_id + "' must be positive");
    }
  }
  if (config.k < kMinSelection || config.k > kMaxSelection) {
    bad_config("k must lie in [4,10]");
  }
  if (config.blacklist_ttl <= 0) {
    bad_config("blacklist_ttl must be positive");
  }
}

ScenarioConfig parse_scenario(std::string_view json_text) {
  ScenarioConfig c;
  try {
    const auto j = json::parse(json_text);
    static const std::set<std::string> kKeys = {
        "rng_seed", "rounds", "products", "agents", "k", "blacklist_ttl"};
    for (const auto& [key, _] : j.items()) {
      if (kKeys.count(key) == 0) {
        bad_config("unknown field '" + key + "'");
      }
    }
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.rounds = j.at("rounds").get<int>();
    for (const auto& p : j.at("products")) {
      c.products.push_back({p.at("product_id").get<std::string>(),
                            p.at("true_quality").get<double>()});
    }
    for (const auto& a : j.at("agents")) {
      c.agents.push_back({a.at("agent_id").get<std::string>(),
                          parse_strategy(a.at("strategy").get<std::string>()),
                          a.at("count").get<int>()});
    }
    c.k = j.value("k", kDefaultSelection);
    c.blacklist_ttl = j.value("blacklist_ttl", kDefaultBlacklistTtl);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  validate(c);
  return c;
}

std::map<std::string, std::optional<double>> batch_product_scores(
    const Store& store) {
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, std::optional<double>> out;
  for (const auto& [id, session] : store.sessions()) {
    out.try_emplace(session.product_id);
    if (session.state != SessionState::Finalized) {
      continue;
    }
    const double trust = store.user(session.user_id).trust_degree;
    if (trust <= 0.0) {
      continue;
    }
    auto& [num, den] = sums[session.product_id];
    num += session.appreciation * trust;
    den += trust;
  }
  for (const auto& [product, s] : sums) {
    out[product] = s.first / s.second;
  }
  return out;
}

Simulation::Simulation(ScenarioConfig config, const Lexicon& lexicon)
    : config_((validate(config), std::move(config))),
      engine_(Store(), lexicon,
              EngineConfig{config_.blacklist_ttl, config_.k}),
      rng_(config_.rng_seed),
      clock_(kEpoch) {
  for (const auto& [token, weight] : lexicon.entries) {
    if (weight >= kVocabularyWeight) {
      vocab_.positive.push_back(token);
    } else if (weight <= -kVocabularyWeight) {
      vocab_.negative.push_back(token);
    }
  }
  vocab_.aspects.assign(lexicon.aspect_terms.begin(),
                        lexicon.aspect_terms.end());
  if (vocab_.positive.empty() || vocab_.negative.empty() ||
      vocab_.aspects.size() < 2) {
    bad_config("lexicon lacks the vocabulary the simulator needs");
  }
  report_.rng_seed = config_.rng_seed;
}

double Simulation::uniform01() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::size_t Simulation::uniform_index(std::size_t n) {
  return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
}

double Simulation::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::string Simulation::text_for(FeedbackCategory category) {
  const auto pick = [this](const std::vector<std::string>& v) {
    return v[uniform_index(v.size())];
  };
  const auto first = pick(vocab_.aspects);
  auto second = pick(vocab_.aspects);
  while (second == first) {
    second = pick(vocab_.aspects);
  }
  const auto sentence = [](const std::string& aspect, const std::string& word) {
    return "the " + aspect + " is " + word + ".";
  };
  switch (category) {
    case FeedbackCategory::Positive:
    case FeedbackCategory::Negative: {
      const auto& words = category == FeedbackCategory::Positive
                              ? vocab_.positive
                              : vocab_.negative;
      auto text = sentence(first, pick(words));
      if (uniform01() < 0.5) {
        text += " " + sentence(second, pick(words));
      }
      return text;
    }
    case FeedbackCategory::Mitigated:
      return sentence(first, pick(vocab_.positive)) + " " +
             sentence(second, pick(vocab_.negative));
    case FeedbackCategory::Contradictory:
      return sentence(first, pick(vocab_.positive)) + " " +
             sentence(first, pick(vocab_.negative));
  }
  return {};
}

const ProductSpec& Simulation::product_for(AgentStrategy strategy) {
  const auto by_quality = [](const ProductSpec& a, const ProductSpec& b) {
    return a.true_quality < b.true_quality;
  };
  switch (strategy) {
    case AgentStrategy::BallotStuffer:
      return *std::min_element(config_.products.begin(), config_.products.end(),
                               by_quality);
    case AgentStrategy::BadMouther:
      // First maximum, to mirror min_element's tie rule.
      return *std::min_element(
          config_.products.begin(), config_.products.end(),
          [](const ProductSpec& a, const ProductSpec& b) {
            return a.true_quality > b.true_quality;
          });
    default:
      return config_.products[uniform_index(config_.products.size())];
  }
}

bool Simulation::honest_likes(const FeedbackRecord& feedback,
                              double true_quality) {
  // A text that contradicts itself convinces nobody, whatever its leaning.
  if (feedback.category == FeedbackCategory::Contradictory) {
    return false;
  }
  auto it = polarity_cache_.find(feedback.feedback_id);
  if (it == polarity_cache_.end()) {
    const double polarity =
        sentiment_score(feedback.text, engine_.lexicon()).overall;
    it = polarity_cache_.emplace(feedback.feedback_id, polarity).first;
  }
  return sign(it->second) == sign(true_quality - 3.0);
}

VoteChoice Simulation::choose_vote(AgentStrategy strategy,
                                   const FeedbackRecord& feedback,
                                   double true_quality) {
  switch (strategy) {
    case AgentStrategy::Honest:
      return honest_likes(feedback, true_quality) ? VoteChoice::Like
                                                  : VoteChoice::Dislike;
    case AgentStrategy::Random:
      return uniform01() < 0.5 ? VoteChoice::Like : VoteChoice::Dislike;
    case AgentStrategy::BadMouther:
      return VoteChoice::Dislike;
    case AgentStrategy::BallotStuffer:
    case AgentStrategy::ContradictoryBot:
      return VoteChoice::Like;
  }
  return VoteChoice::Like;
}

void Simulation::seed_knowledge_base() {
  engine_.create_user(kCurator, clock_++);
  for (const auto& p : config_.products) {
    for (auto category : kAllCategories) {
      const int copies =
          category == FeedbackCategory::Contradictory ? 1 : kSeedsPerCategory;
      for (int n = 0; n < copies; ++n) {
        const auto text = text_for(category);
        const double appreciation =
            category == FeedbackCategory::Positive   ? 4.5
            : category == FeedbackCategory::Negative ? 1.5
                                                     : 3.0;
        // Seeds an honest reviewer would like are trustworthy.
        const double polarity = sentiment_score(text, engine_.lexicon()).overall;
        const double trust = sign(polarity) == sign(p.true_quality - 3.0)
                                 ? kSeedTrust
                                 : -kSeedTrust;
        engine_.add_prefabricated("", kCurator, p.product_id, appreciation,
                                  text, trust, clock_++);
      }
    }
  }
}

void Simulation::take_turn(const std::string& user_id, AgentStrategy strategy,
                           RoundStats& stats) {
  const Timestamp now = clock_++;
  if (engine_.user_status(user_id, now).blacklisted) {
    return;
  }
  const auto& product = product_for(strategy);
  const double q = product.true_quality;

  double appreciation = 3.0;
  std::string text;
  switch (strategy) {
    case AgentStrategy::Honest: {
      appreciation = std::clamp(q + uniform(-0.5, 0.5), kMinAppreciation,
                                kMaxAppreciation);
      const auto category = appreciation >= 3.5   ? FeedbackCategory::Positive
                            : appreciation <= 2.5 ? FeedbackCategory::Negative
                                                  : FeedbackCategory::Mitigated;
      // Mixed texts lean the way the agent actually judges the product.
      for (int attempt = 0; attempt < kLeaningAttempts; ++attempt) {
        text = text_for(category);
        if (sign(sentiment_score(text, engine_.lexicon()).overall) ==
            sign(q - 3.0)) {
          break;
        }
      }
      break;
    }
    case AgentStrategy::Random: {
      appreciation = uniform(kMinAppreciation, kMaxAppreciation);
      static constexpr std::array<FeedbackCategory, 3> kPolar = {
          FeedbackCategory::Positive, FeedbackCategory::Negative,
          FeedbackCategory::Mitigated};
      text = text_for(kPolar[uniform_index(kPolar.size())]);
      break;
    }
    case AgentStrategy::BallotStuffer:
      appreciation = kMaxAppreciation;
      text = text_for(FeedbackCategory::Positive);
      break;
    case AgentStrategy::BadMouther:
      appreciation = kMinAppreciation;
      text = text_for(FeedbackCategory::Negative);
      break;
    case AgentStrategy::ContradictoryBot:
      appreciation = uniform(kMinAppreciation, kMaxAppreciation);
      text = text_for(FeedbackCategory::Contradictory);
      // The bot also posts straight into the feedback feed that fills the
      // knowledge base, bypassing the review gate.
      engine_.add_prefabricated("", user_id, product.product_id, appreciation,
                                text, std::nullopt, now);
      break;
  }

  const auto session = engine_.submit_review(user_id, product.product_id,
                                             appreciation, text, config_.k, now);
  if (session.state == SessionState::Rejected) {
    ++stats.rejected;
    return;
  }
  for (const auto& id : session.selection) {
    const auto feedback =
        engine_.read([&](const Store& s) { return s.feedback(id); });
    const auto choice = choose_vote(strategy, feedback, q);
    const auto outcome =
        engine_.process_vote(session.session_id, id, choice, clock_++);
    if (feedback.category == FeedbackCategory::Contradictory &&
        choice == VoteChoice::Like) {
      ++report_.contradictory_likes;
      if (outcome.trust_after != kMinTrust) {
        ++report_.contradictory_like_violations;
      }
    }
  }
  engine_.finalize_session(session.session_id, clock_++);
  ++stats.finalized;
}

RoundStats Simulation::snapshot(int round) const {
  RoundStats stats;
  stats.round = round;
  engine_.read([&](const Store& store) {
    for (const auto& p : config_.products) {
      const auto agg = store.aggregate(p.product_id);
      ProductRound pr;
      pr.product_id = p.product_id;
      pr.score = agg.score();
      if (pr.score) {
        pr.abs_error = std::fabs(*pr.score - p.true_quality);
      }
      pr.rating_count = agg.rating_count;
      stats.products.push_back(std::move(pr));
    }
    for (const auto& [strategy, ids] : agents_) {
      GroupRound g;
      g.strategy = strategy;
      g.agents = static_cast<int>(ids.size());
      double total = 0.0;
      for (const auto& id : ids) {
        total += store.user(id).trust_degree;
        if (store.is_blacklisted(id, clock_)) {
          ++g.blacklisted;
        }
      }
      g.mean_trust = total / static_cast<double>(ids.size());
      stats.blacklisted += g.blacklisted;
      stats.groups.push_back(g);
    }
    return 0;
  });
  return stats;
}

std::vector<DriftEntry> Simulation::measure_drift() const {
  const auto journal =
      engine_.read([](const Store& s) { return s.journal_text(); });
  const auto replayed = Store::replay(journal);
  const auto batch = batch_product_scores(replayed);
  std::vector<DriftEntry> out;
  for (const auto& p : config_.products) {
    DriftEntry e;
    e.product_id = p.product_id;
    e.incremental = replayed.aggregate(p.product_id).score();
    if (const auto it = batch.find(p.product_id); it != batch.end()) {
      e.batch = it->second;
    }
    if (e.incremental && e.batch) {
      e.drift = std::fabs(*e.incremental - *e.batch);
    }
    out.push_back(std::move(e));
  }
  return out;
}

SimulationReport Simulation::run() {
  if (!agents_.empty()) {
    return report_;
  }
  std::vector<std::pair<std::string, AgentStrategy>> roster;
  for (const auto& group : config_.agents) {
    for (int n = 1; n <= group.count; ++n) {
      auto id = group.agent_id + "-" + std::to_string(n);
      engine_.create_user(id, clock_++);
      agents_[group.strategy].push_back(id);
      roster.emplace_back(std::move(id), group.strategy);
    }
  }
  seed_knowledge_base();
  report_.initial = snapshot(0);

  for (int round = 1; round <= config_.rounds; ++round) {
    clock_ = std::max(clock_, kEpoch + round * kRoundSeconds);
    // Fisher-Yates with the scenario RNG keeps the turn order reproducible.
    for (std::size_t i = roster.size(); i > 1; --i) {
      std::swap(roster[i - 1], roster[uniform_index(i)]);
    }
    RoundStats counts;
    for (const auto& [id, strategy] : roster) {
      take_turn(id, strategy, counts);
    }
    auto stats = snapshot(round);
    stats.finalized = counts.finalized;
    stats.rejected = counts.rejected;
    report_.rounds.push_back(std::move(stats));
  }

  engine_.read([&](const Store& store) {
    const auto bots = agents_.find(AgentStrategy::ContradictoryBot);
    if (bots == agents_.end()) {
      return 0;
    }
    for (const auto& id : bots->second) {
      for (const auto& f : store.feedbacks_by_author(id)) {
        ++report_.bot_feedbacks;
        if (f.category == FeedbackCategory::Contradictory &&
            f.trustworthiness != kMinTrust) {
          ++report_.bot_feedback_violations;
        }
      }
    }
    return 0;
  });
  report_.drift = measure_drift();
  return report_;
}

SimulationReport run_simulation(const ScenarioConfig& config) {
  Simulation sim(config);
  return sim.run();
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") {
    return ReportFormat::Table;
  }
  if (name == "csv") {
    return ReportFormat::Csv;
  }
  if (name == "json") {
    return ReportFormat::Json;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown_format",
              "report format must be table, csv or json, got '" +
                  std::string(name) + "'");
}

std::string emit_report(const SimulationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      json rounds = json::array();
      for (const auto& r : report.rounds) {
        rounds.push_back(round_json(r));
      }
      json drift = json::array();
      for (const auto& d : report.drift) {
        drift.push_back({{"product_id", d.product_id},
                         {"incremental", optional_number(d.incremental)},
                         {"batch", optional_number(d.batch)},
                         {"drift", optional_number(d.drift)}});
      }
      const json out = {
          {"rng_seed", report.rng_seed},
          {"initial", round_json(report.initial)},
          {"rounds", std::move(rounds)},
          {"drift", std::move(drift)},
          {"contradictory_likes", report.contradictory_likes},
          {"contradictory_like_violations",
           report.contradictory_like_violations},
          {"bot_feedbacks", report.bot_feedbacks},
          {"bot_feedback_violations", report.bot_feedback_violations}};
      return out.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out(kCsvHeader);
      out += '\n';
      csv_round(out, report.initial);
      for (const auto& r : report.rounds) {
        csv_round(out, r);
      }
      const int last = report.rounds.empty() ? 0 : report.rounds.back().round;
      for (const auto& d : report.drift) {
        csv_row(out, last, "incremental_score", d.product_id,
                d.incremental ? number(*d.incremental) : "unrated");
        csv_row(out, last, "batch_score", d.product_id,
                d.batch ? number(*d.batch) : "unrated");
        csv_row(out, last, "drift", d.product_id,
                d.drift ? number(*d.drift) : "");
      }
      csv_row(out, last, "contradictory_likes", "",
              std::to_string(report.contradictory_likes));
      csv_row(out, last, "contradictory_like_violations", "",
              std::to_string(report.contradictory_like_violations));
      csv_row(out, last, "bot_feedbacks", "",
              std::to_string(report.bot_feedbacks));
      csv_row(out, last, "bot_feedback_violations", "",
              std::to_string(report.bot_feedback_violations));
      return out;
    }
    case ReportFormat::Table: {
      constexpr int kWidth = 12;
      std::string header = format_header("round", 6);
      for (const auto& p : report.initial.products) {
        header += format_header("score:" + p.product_id, kWidth + 6);
        header += format_header("err:" + p.product_id, kWidth + 4);
      }
      for (const auto& g : report.initial.groups) {
        header += format_header("trust:" + std::string(to_string(g.strategy)),
                                kWidth + 12);
      }
      header += format_header("blacklisted", kWidth);
      std::string out = header + "\n";
      for (const auto& r : report.rounds) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%6d", r.round);
        std::string line = buf;
        for (const auto& p : r.products) {
          line += format_cell(p.score, kWidth + 6);
          line += format_cell(p.abs_error, kWidth + 4);
        }
        for (const auto& g : r.groups) {
          line += format_cell(g.mean_trust, kWidth + 12);
        }
        std::snprintf(buf, sizeof(buf), "%*d", kWidth, r.blacklisted);
        line += buf;
        out += line + "\n";
      }
      return out;
    }
  }
  return {};
}

SimulationReport parse_report_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    SimulationReport r;
    r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    r.initial = round_from_json(j.at("initial"));
    for (const auto& round : j.at("rounds")) {
      r.rounds.push_back(round_from_json(round));
    }
    for (const auto& d : j.at("drift")) {
      r.drift.push_back({d.at("product_id").get<std::string>(),
                         read_optional(d, "incremental"),
                         read_optional(d, "batch"), read_optional(d, "drift")});
    }
    r.contradictory_likes = j.at("contradictory_likes").get<std::uint64_t>();
    r.contradictory_like_violations =
        j.at("contradictory_like_violations").get<std::uint64_t>();
    r.bot_feedbacks = j.at("bot_feedbacks").get<std::uint64_t>();
    r.bot_feedback_violations =
        j.at("bot_feedback_violations").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "invalid_report", e.what());
  }
}

}  // namespace trs
