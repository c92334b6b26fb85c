#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "idmilp/diagram.hpp"
#include "idmilp/mixed_radix.hpp"

namespace idmilp {

/// One state index per slot (chance and decision nodes, declaration order).
using Path = std::vector<int>;

/// States for a subset of slots. `slots` is kept sorted.
struct PathSegment {
  std::vector<int> slots;
  std::vector<int> states;
};

/// Shift applied by shift_utilities_positive when none is given.
inline constexpr double kUtilityShift = 1.0;

/// All paths S in mixed-radix order; streamed, never materialized.
AssignmentRange enumerate_paths(const InfluenceDiagram& diagram);

double path_probability(const InfluenceDiagram& diagram, std::span<const int> path);
double path_utility(const InfluenceDiagram& diagram, std::span<const int> path);

/// U - min U + epsilon. Throws std::invalid_argument on empty input or
/// non-positive epsilon.
std::vector<double> shift_utilities_positive(std::span<const double> values, double epsilon = kUtilityShift);

/// Indices (in path order) of S^> = {s : p(s) > 0}.
std::vector<std::uint64_t> positive_path_set(const InfluenceDiagram& diagram);

/// Observable segments S_O; digits align with diagram.observation_set().
AssignmentRange observable_segments(const InfluenceDiagram& diagram);
PathSegment observable_segment(const InfluenceDiagram& diagram, std::span<const int> digits);
MixedRadix observable_radix(const InfluenceDiagram& diagram);

/// Builds a segment from (node name, state index) pairs.
PathSegment make_segment(const InfluenceDiagram& diagram, std::span<const std::pair<int, int>> node_states);

enum class ExtensionMode { all, positive, observable };

/// E(s_M), E^>(s_M) as paths, or E_O(s_M) as observable-segment digit
/// vectors. Throws std::invalid_argument when the segment uses a slot
/// outside the mode's universe.
std::vector<std::vector<int>> extension(const InfluenceDiagram& diagram, const PathSegment& segment, ExtensionMode mode);

/// 𝔼_U(s_M) = Σ_{s∈E(s_M)} p(s) U(s), by direct summation.
double segment_expected_utility(const InfluenceDiagram& diagram, const PathSegment& segment);

/// Rounds to the nearest multiple of `grid`; identity when grid <= 0.
double quantize_utility(double value, double grid);

struct UtilityLevels {
  std::vector<double> levels;  // ascending, exact-equality deduplicated
  double epsilon = 1.0;        // half the smallest positive gap; 1 when |U| = 1
};

UtilityLevels utility_levels(const InfluenceDiagram& diagram, double grid = 0.0);
UtilityLevels utility_levels_from_values(std::vector<double> values);

/// Σ_{s∈E(s_M), U(s)=u} p(s).
double segment_utility_mass(const InfluenceDiagram& diagram, const PathSegment& segment, double level,
                            double grid = 0.0);

struct StatisticsOptions {
  double utility_grid = 0.0;  // > 0 quantizes utilities before level grouping
  unsigned workers = 0;       // 0 = hardware concurrency
  std::size_t chunk_size = 64;
};

/// Per-observable-segment aggregates feeding every formulation.
///
/// Built by streaming each segment's extension; memory is O(|S_O| + total
/// distinct (segment, level) pairs), never O(|S|) per-path records.
/// Results are identical for any worker count or chunk size.
struct PathStatistics {
  std::vector<int> observation_nodes;
  std::vector<int> observation_slots;
  MixedRadix segment_radix;

  std::uint64_t path_count = 0;
  std::uint64_t positive_path_count = 0;
  double min_utility = 0.0;
  double max_utility = 0.0;

  std::vector<double> segment_probability;       // Σ_{E(s_O)} p(s)
  std::vector<double> segment_expected_utility;  // Σ_{E(s_O)} p(s) U(s), unshifted
  std::vector<std::uint64_t> segment_positive_paths;  // |E^>(s_O)|

  UtilityLevels levels;
  /// Per segment: (level index, probability mass), ascending level index.
  std::vector<std::vector<std::pair<int, double>>> segment_level_mass;

  std::uint64_t segment_count() const { return segment_radix.size(); }
  /// 𝔼_{U^>}(s_O) for U^> = U - min U + epsilon.
  double shifted_expected_utility(std::uint64_t segment, double epsilon = kUtilityShift) const {
    return segment_expected_utility[segment] + (epsilon - min_utility) * segment_probability[segment];
  }
};

PathStatistics compute_path_statistics(const InfluenceDiagram& diagram, const StatisticsOptions& options = {});

}  // namespace idmilp
