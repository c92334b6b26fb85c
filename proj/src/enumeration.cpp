#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>

#include "idmilp/solve.hpp"

namespace idmilp {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::feasible:
      return "feasible";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::cap_exceeded:
      return "cap_exceeded";
    case SolveStatus::timeout:
      return "timeout";
  }
  return "infeasible";
}

SolveStatus solve_status_from_string(std::string_view text) {
  if (text == "optimal") return SolveStatus::optimal;
  if (text == "feasible") return SolveStatus::feasible;
  if (text == "infeasible") return SolveStatus::infeasible;
  if (text == "cap_exceeded") return SolveStatus::cap_exceeded;
  if (text == "timeout") return SolveStatus::timeout;
  throw std::invalid_argument("unknown solve status '" + std::string(text) + "'");
}

nlohmann::json to_json(const InfluenceDiagram& diagram, const SolveResult& result) {
  nlohmann::json j;
  j["status"] = std::string(to_string(result.status));
  j["objective"] = result.objective;
  if (!std::isnan(result.recomputed_objective)) j["recomputed_objective"] = result.recomputed_objective;
  nlohmann::json strategy = nlohmann::json::object();
  const auto decisions = diagram.decision_nodes();
  if (result.strategy.rules.size() == decisions.size()) {
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const int d = decisions[k];
      nlohmann::json rows = nlohmann::json::array();
      for (int a : result.strategy.rules[k])
        rows.push_back(a >= 0 ? nlohmann::json(diagram.node(d).states[static_cast<std::size_t>(a)]) : nlohmann::json());
      strategy[diagram.node(d).name] = rows;
    }
  }
  j["strategy"] = strategy;
  nlohmann::json dist = nlohmann::json::array();
  for (const auto& [u, q] : result.distribution) dist.push_back({u, q});
  j["distribution"] = dist;
  j["timing"] = {{"tau_p", result.timing.preprocess}, {"tau_s", result.timing.solve}, {"tau_t", result.timing.total}};
  j["search"] = {{"nodes", result.search.nodes}, {"leaves", result.search.leaves},
                 {"backtracks", result.search.backtracks}};
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Σ_{s∈E(s_O), s_T∈𝒮_T} p(s) for every observable segment, in one path pass.
std::vector<double> segment_event_mass(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                       const ChanceEvent& event) {
  std::vector<double> mass(stats.segment_count(), 0.0);
  std::vector<int> digits(stats.observation_slots.size());
  for (const auto& path : enumerate_paths(diagram)) {
    if (!event.contains(path)) continue;
    const double p = path_probability(diagram, path);
    if (p == 0.0) continue;
    for (std::size_t k = 0; k < digits.size(); ++k) digits[k] = path[static_cast<std::size_t>(stats.observation_slots[k])];
    mass[stats.segment_radix.index(digits)] += p;
  }
  return mass;
}

class Enumerator {
 public:
  Enumerator(const InfluenceDiagram& diagram, const PathStatistics& stats, const EnumerationOptions& options)
      : diagram_(diagram),
        stats_(stats),
        options_(options),
        rows_(diagram),
        segments_(diagram, stats, rows_),
        rule_(rows_.size(), -1) {
    triggers_.resize(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) triggers_[r].resize(static_cast<std::size_t>(rows_.alternatives[r]));
    for (std::uint64_t g = 0; g < stats.segment_count(); ++g) {
      const auto& req = segments_.requirements[g];
      if (req.empty()) {
        always_.push_back(g);
        continue;
      }
      triggers_[req.back().first][static_cast<std::size_t>(req.back().second)].push_back(g);
    }
    for (const auto& spec : options.chance) {
      const ChanceEvent event(diagram, spec);
      event_mass_.push_back(segment_event_mass(diagram, stats, event));
      thresholds_.push_back(spec.threshold + kChanceTolerance);
    }
    if (options.time_limit >= 0.0) deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                                 std::chrono::duration<double>(options.time_limit));
  }

  void run(SearchStats& search) {
    search_ = &search;
    double eu = 0.0;
    std::vector<double> chance(event_mass_.size(), 0.0);
    for (auto g : always_) admit(g, eu, chance);
    if (violates(chance)) return;
    descend(0, eu, chance);
  }

  bool found() const { return found_; }
  bool interrupted() const { return interrupted_; }
  const std::vector<int>& best_rule() const { return best_rule_; }

 private:
  void admit(std::uint64_t g, double& eu, std::vector<double>& chance) {
    eu += stats_.segment_expected_utility[g];
    for (std::size_t k = 0; k < chance.size(); ++k) chance[k] += event_mass_[k][g];
    compatible_.push_back(g);
  }

  bool violates(const std::vector<double>& chance) const {
    for (std::size_t k = 0; k < chance.size(); ++k)
      if (chance[k] > thresholds_[k]) return true;
    return false;
  }

  bool out_of_time() {
    if (!deadline_) return false;
    if ((++clock_ticks_ & 0xfff) != 0) return false;
    if (Clock::now() >= *deadline_) interrupted_ = true;
    return interrupted_;
  }

  void descend(std::size_t row, double eu, const std::vector<double>& chance) {
    if (interrupted_ || out_of_time()) return;
    ++search_->nodes;
    if (row == rows_.size()) {
      ++search_->leaves;
      consider(eu);
      return;
    }
    for (int a = 0; a < rows_.alternatives[row]; ++a) {
      rule_[row] = a;
      const std::size_t mark = compatible_.size();
      double next_eu = eu;
      std::vector<double> next_chance = chance;
      for (auto g : triggers_[row][static_cast<std::size_t>(a)]) {
        bool ok = true;
        for (const auto& [r, alt] : segments_.requirements[g])
          if (rule_[r] != alt) {
            ok = false;
            break;
          }
        if (ok) admit(g, next_eu, next_chance);
      }
      if (!violates(next_chance)) descend(row + 1, next_eu, next_chance);
      compatible_.resize(mark);
      if (interrupted_) break;
    }
    rule_[row] = -1;
  }

  void consider(double eu) {
    double value = eu;
    if (options_.objective.kind == Objective::Kind::cvar) {
      std::vector<double> mass(stats_.levels.levels.size(), 0.0);
      for (auto g : compatible_)
        for (const auto& [level, m] : stats_.segment_level_mass[g]) mass[static_cast<std::size_t>(level)] += m;
      UtilityDistribution dist;
      for (std::size_t l = 0; l < mass.size(); ++l)
        if (mass[l] > 0.0) dist.emplace_back(stats_.levels.levels[l], mass[l]);
      value = cvar_of_distribution(std::move(dist), options_.objective.alpha);
    }
    if (!found_ || value > best_value_) {
      found_ = true;
      best_value_ = value;
      best_rule_ = rule_;
    }
  }

  const InfluenceDiagram& diagram_;
  const PathStatistics& stats_;
  const EnumerationOptions& options_;
  DecisionRowIndex rows_;
  SegmentRequirements segments_;
  std::vector<std::vector<std::vector<std::uint64_t>>> triggers_;  // [row][alt] -> segments completed there
  std::vector<std::uint64_t> always_;
  std::vector<std::vector<double>> event_mass_;
  std::vector<double> thresholds_;
  std::vector<int> rule_;
  std::vector<std::uint64_t> compatible_;
  std::optional<Clock::time_point> deadline_;
  std::uint64_t clock_ticks_ = 0;
  SearchStats* search_ = nullptr;
  bool interrupted_ = false;
  bool found_ = false;
  double best_value_ = 0.0;
  std::vector<int> best_rule_;

};

DecisionStrategy rules_to_strategy(const InfluenceDiagram& diagram, const std::vector<int>& flat) {
  const DecisionRowIndex rows(diagram);
  DecisionStrategy s = empty_strategy(diagram);
  for (std::size_t r = 0; r < rows.size(); ++r) s.rules[static_cast<std::size_t>(rows.ordinal[r])][rows.info[r]] = flat[r];
  return s;
}

}  // namespace

SolveResult solve_by_enumeration(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                 const EnumerationOptions& options) {
  SolveResult result;
  if (options.objective.kind == Objective::Kind::cvar &&
      !(options.objective.alpha > 0.0 && options.objective.alpha <= 1.0))
    throw std::invalid_argument("CVaR level alpha must lie in (0, 1]");
  try {
    if (strategy_space_size(diagram) > options.cap) {
      result.status = SolveStatus::cap_exceeded;
      return result;
    }
  } catch (const StrategyCountOverflow&) {
    result.status = SolveStatus::cap_exceeded;
    return result;
  }
  if (options.time_limit == 0.0) {
    result.status = SolveStatus::timeout;
    return result;
  }
  const auto start = Clock::now();
  Enumerator search(diagram, stats, options);
  search.run(result.search);
  if (search.found()) {
    result.strategy = rules_to_strategy(diagram, search.best_rule());
    result.distribution = utility_distribution_of_strategy(diagram, result.strategy, options.statistics.utility_grid);
    result.objective = options.objective.kind == Objective::Kind::cvar
                           ? cvar_of_distribution(result.distribution, options.objective.alpha)
                           : expected_utility_of_strategy(diagram, result.strategy);
    result.status = search.interrupted() ? SolveStatus::feasible : SolveStatus::optimal;
  } else {
    result.status = search.interrupted() ? SolveStatus::timeout : SolveStatus::infeasible;
  }
  result.timing.solve = seconds_since(start);
  result.timing.finish();
  return result;
}

SolveResult solve_by_enumeration(const InfluenceDiagram& diagram, const EnumerationOptions& options) {
  // Statistics can dwarf the search, so reject oversized spaces first.
  SolveResult over;
  over.status = SolveStatus::cap_exceeded;
  try {
    if (strategy_space_size(diagram) > options.cap) return over;
  } catch (const StrategyCountOverflow&) {
    return over;
  }
  const auto start = Clock::now();
  const auto stats = compute_path_statistics(diagram, options.statistics);
  const double preprocess = seconds_since(start);
  auto result = solve_by_enumeration(diagram, stats, options);
  result.timing.preprocess += preprocess;
  result.timing.finish();
  return result;
}

}  // namespace idmilp
