#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "idmilp/diagram.hpp"
#include "idmilp/formulations.hpp"
#include "idmilp/paths.hpp"

namespace idmilp {

/// rules[d][info] = chosen alternative for decision ordinal d; -1 = unset.
struct DecisionStrategy {
  std::vector<std::vector<int>> rules;

  bool operator==(const DecisionStrategy&) const = default;
};

/// Strategy with every rule unset.
DecisionStrategy empty_strategy(const InfluenceDiagram& diagram);

/// Throws std::invalid_argument unless every rule holds a valid alternative.
void check_complete(const InfluenceDiagram& diagram, const DecisionStrategy& strategy);

bool path_compatible(const InfluenceDiagram& diagram, const DecisionStrategy& strategy, std::span<const int> path);

/// Σ over paths compatible with the strategy of p(s) U(s), unshifted.
double expected_utility_of_strategy(const InfluenceDiagram& diagram, const DecisionStrategy& strategy);

/// Atoms (u, q(u)) ascending in u, grouped by exact (or grid-quantized)
/// utility; only atoms of positive probability are kept.
using UtilityDistribution = std::vector<std::pair<double, double>>;
UtilityDistribution utility_distribution_of_strategy(const InfluenceDiagram& diagram, const DecisionStrategy& strategy,
                                                     double grid = 0.0);

/// Mean of the worst alpha-tail: atoms sorted ascending, tail mass filled
/// greedily up to alpha. Throws std::invalid_argument for alpha ∉ (0, 1].
double cvar_of_distribution(UtilityDistribution distribution, double alpha);

/// Probability that the strategy's path lands in the event.
double event_probability(const InfluenceDiagram& diagram, const DecisionStrategy& strategy, const ChanceEvent& event);

/// Visits every complete strategy in lexicographic order (first decision
/// row outermost, alternatives ascending). The callback returns false to stop.
void for_each_strategy(const InfluenceDiagram& diagram, const std::function<bool(const DecisionStrategy&)>& visit);

/// y(s_O) = 1 exactly for the observable segments compatible with the
/// strategy, indexed like stats.segment_radix.
std::vector<double> segment_indicator(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                      const DecisionStrategy& strategy);

/// x(s) = 1 exactly for the positive-probability paths compatible with the
/// strategy; indexed like positive_path_set().
std::vector<double> path_indicator(const InfluenceDiagram& diagram, const DecisionStrategy& strategy);

/// Flattened decision rows: row r <-> (decision ordinal, info index), with
/// ordinals outermost. Shared by the strategy searches.
struct DecisionRowIndex {
  std::vector<std::uint64_t> offset;  // first row of each ordinal
  std::vector<int> alternatives;      // per row
  std::vector<int> ordinal;           // per row
  std::vector<std::uint64_t> info;    // per row

  explicit DecisionRowIndex(const InfluenceDiagram& diagram);
  std::size_t size() const { return alternatives.size(); }
  std::size_t row(int d, std::uint64_t info_index) const {
    return static_cast<std::size_t>(offset[static_cast<std::size_t>(d)] + info_index);
  }
};

/// Observable segments seen from the strategy: each segment is compatible
/// exactly when every (row, alternative) requirement holds.
struct SegmentRequirements {
  std::vector<std::vector<std::pair<std::uint32_t, int>>> requirements;  // per segment, rows ascending
  std::vector<std::uint64_t> group;  // index of the segment's C_I assignment
  std::uint64_t group_count = 1;

  SegmentRequirements(const InfluenceDiagram& diagram, const PathStatistics& stats, const DecisionRowIndex& rows);
};

}  // namespace idmilp
