#include "idmilp/strategy.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace idmilp {

DecisionStrategy empty_strategy(const InfluenceDiagram& diagram) {
  DecisionStrategy s;
  for (int d : diagram.decision_nodes()) s.rules.emplace_back(diagram.info_count(d), -1);
  return s;
}

void check_complete(const InfluenceDiagram& diagram, const DecisionStrategy& strategy) {
  const auto decisions = diagram.decision_nodes();
  if (strategy.rules.size() != decisions.size()) throw std::invalid_argument("incomplete strategy: wrong decision count");
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const int d = decisions[k];
    if (strategy.rules[k].size() != diagram.info_count(d))
      throw std::invalid_argument("incomplete strategy: wrong row count for " + diagram.node(d).name);
    for (int a : strategy.rules[k])
      if (a < 0 || a >= diagram.state_count(d))
        throw std::invalid_argument("incomplete strategy: unset or invalid rule for " + diagram.node(d).name);
  }
}

bool path_compatible(const InfluenceDiagram& diagram, const DecisionStrategy& strategy, std::span<const int> path) {
  const auto decisions = diagram.decision_nodes();
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const int d = decisions[k];
    if (strategy.rules[k][diagram.info_index(d, path)] != path[static_cast<std::size_t>(diagram.slot_of(d))])
      return false;
  }
  return true;
}

double expected_utility_of_strategy(const InfluenceDiagram& diagram, const DecisionStrategy& strategy) {
  check_complete(diagram, strategy);
  double total = 0.0;
  for (const auto& path : enumerate_paths(diagram)) {
    if (!path_compatible(diagram, strategy, path)) continue;
    const double p = path_probability(diagram, path);
    if (p != 0.0) total += p * path_utility(diagram, path);
  }
  return total;
}

UtilityDistribution utility_distribution_of_strategy(const InfluenceDiagram& diagram, const DecisionStrategy& strategy,
                                                     double grid) {
  check_complete(diagram, strategy);
  std::map<double, double> atoms;
  for (const auto& path : enumerate_paths(diagram)) {
    if (!path_compatible(diagram, strategy, path)) continue;
    const double p = path_probability(diagram, path);
    if (p > 0.0) atoms[quantize_utility(path_utility(diagram, path), grid)] += p;
  }
  return {atoms.begin(), atoms.end()};
}

double cvar_of_distribution(UtilityDistribution distribution, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("CVaR level alpha must lie in (0, 1]");
  std::sort(distribution.begin(), distribution.end());
  double remaining = alpha;
  double total = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    const auto& [u, q] = distribution[i];
    // The last atom absorbs rounding so that the full tail always counts.
    const double take = i + 1 == distribution.size() ? remaining : std::min(q, remaining);
    total += take * u;
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return total / alpha;
}

double event_probability(const InfluenceDiagram& diagram, const DecisionStrategy& strategy, const ChanceEvent& event) {
  check_complete(diagram, strategy);
  double total = 0.0;
  for (const auto& path : enumerate_paths(diagram))
    if (event.contains(path) && path_compatible(diagram, strategy, path)) total += path_probability(diagram, path);
  return total;
}

void for_each_strategy(const InfluenceDiagram& diagram, const std::function<bool(const DecisionStrategy&)>& visit) {
  const DecisionRowIndex rows(diagram);
  std::vector<int> digits(rows.size(), 0);
  const MixedRadix radix(rows.alternatives);
  DecisionStrategy s = empty_strategy(diagram);
  do {
    for (std::size_t r = 0; r < rows.size(); ++r)
      s.rules[static_cast<std::size_t>(rows.ordinal[r])][rows.info[r]] = digits[r];
    if (!visit(s)) return;
  } while (radix.increment(digits));
}

std::vector<double> segment_indicator(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                      const DecisionStrategy& strategy) {
  check_complete(diagram, strategy);
  std::vector<double> y(stats.segment_count(), 0.0);
  Path path(diagram.slot_count(), 0);
  std::vector<int> digits(stats.observation_slots.size());
  for (std::uint64_t g = 0; g < stats.segment_count(); ++g) {
    stats.segment_radix.decode(g, digits);
    for (std::size_t k = 0; k < digits.size(); ++k) path[static_cast<std::size_t>(stats.observation_slots[k])] = digits[k];
    if (path_compatible(diagram, strategy, path)) y[g] = 1.0;
  }
  return y;
}

std::vector<double> path_indicator(const InfluenceDiagram& diagram, const DecisionStrategy& strategy) {
  check_complete(diagram, strategy);
  std::vector<double> x;
  for (const auto& path : enumerate_paths(diagram))
    if (path_probability(diagram, path) > 0.0) x.push_back(path_compatible(diagram, strategy, path) ? 1.0 : 0.0);
  return x;
}

DecisionRowIndex::DecisionRowIndex(const InfluenceDiagram& diagram) {
  const auto decisions = diagram.decision_nodes();
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    offset.push_back(alternatives.size());
    for (std::uint64_t i = 0; i < diagram.info_count(decisions[k]); ++i) {
      alternatives.push_back(diagram.state_count(decisions[k]));
      ordinal.push_back(static_cast<int>(k));
      info.push_back(i);
    }
  }
}

SegmentRequirements::SegmentRequirements(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                         const DecisionRowIndex& rows) {
  const auto decisions = diagram.decision_nodes();
  std::vector<int> chance_positions, chance_radices;
  for (std::size_t k = 0; k < stats.observation_nodes.size(); ++k)
    if (diagram.kind(stats.observation_nodes[k]) == NodeKind::chance) {
      chance_positions.push_back(static_cast<int>(k));
      chance_radices.push_back(diagram.state_count(stats.observation_nodes[k]));
    }
  const MixedRadix chance_radix(chance_radices);
  group_count = chance_radix.size();

  const std::uint64_t count = stats.segment_count();
  requirements.resize(count);
  group.resize(count);
  Path path(diagram.slot_count(), 0);
  std::vector<int> digits(stats.observation_slots.size()), chance_digits(chance_positions.size());
  for (std::uint64_t g = 0; g < count; ++g) {
    stats.segment_radix.decode(g, digits);
    for (std::size_t k = 0; k < digits.size(); ++k) path[static_cast<std::size_t>(stats.observation_slots[k])] = digits[k];
    for (std::size_t k = 0; k < chance_positions.size(); ++k)
      chance_digits[k] = digits[static_cast<std::size_t>(chance_positions[k])];
    group[g] = chance_radix.index(chance_digits);
    auto& req = requirements[g];
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const int d = decisions[k];
      req.emplace_back(static_cast<std::uint32_t>(rows.row(static_cast<int>(k), diagram.info_index(d, path))),
                       path[static_cast<std::size_t>(diagram.slot_of(d))]);
    }
    std::sort(req.begin(), req.end());
  }
}

}  // namespace idmilp
