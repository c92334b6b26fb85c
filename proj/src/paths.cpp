#include "idmilp/paths.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace idmilp {

AssignmentRange enumerate_paths(const InfluenceDiagram& diagram) { return AssignmentRange(diagram.path_radix()); }

double path_probability(const InfluenceDiagram& diagram, std::span<const int> path) {
  double p = 1.0;
  for (int c : diagram.chance_nodes()) {
    const auto& table = diagram.cpt(c);
    p *= table.at(diagram.info_index(c, path), path[static_cast<std::size_t>(diagram.slot_of(c))]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

double path_utility(const InfluenceDiagram& diagram, std::span<const int> path) {
  double u = 0.0;
  for (int v : diagram.value_nodes()) u += diagram.utility_table(v).values[diagram.info_index(v, path)];
  return u;
}

std::vector<double> shift_utilities_positive(std::span<const double> values, double epsilon) {
  if (values.empty()) throw std::invalid_argument("cannot shift an empty utility vector");
  if (!(epsilon > 0.0)) throw std::invalid_argument("utility shift must be positive");
  const double lowest = *std::min_element(values.begin(), values.end());
  std::vector<double> shifted;
  shifted.reserve(values.size());
  for (double u : values) shifted.push_back(u - lowest + epsilon);
  return shifted;
}

std::vector<std::uint64_t> positive_path_set(const InfluenceDiagram& diagram) {
  std::vector<std::uint64_t> result;
  auto range = enumerate_paths(diagram);
  for (auto it = range.begin(); it != range.end(); ++it)
    if (path_probability(diagram, *it) > 0.0) result.push_back(it.position());
  return result;
}

MixedRadix observable_radix(const InfluenceDiagram& diagram) {
  std::vector<int> radices;
  for (int n : diagram.observation_set()) radices.push_back(diagram.state_count(n));
  return MixedRadix(std::move(radices));
}

AssignmentRange observable_segments(const InfluenceDiagram& diagram) {
  return AssignmentRange(observable_radix(diagram));
}

PathSegment observable_segment(const InfluenceDiagram& diagram, std::span<const int> digits) {
  PathSegment segment;
  const auto observed = diagram.observation_set();
  for (std::size_t k = 0; k < observed.size(); ++k) {
    segment.slots.push_back(diagram.slot_of(observed[k]));
    segment.states.push_back(digits[k]);
  }
  return segment;
}

PathSegment make_segment(const InfluenceDiagram& diagram, std::span<const std::pair<int, int>> node_states) {
  std::vector<std::pair<int, int>> entries;
  for (auto [node, state] : node_states) {
    const int slot = diagram.slot_of(node);
    if (slot < 0) throw std::invalid_argument(diagram.node(node).name + " has no states");
    if (state < 0 || state >= diagram.state_count(node))
      throw std::out_of_range("state index out of range for " + diagram.node(node).name);
    entries.emplace_back(slot, state);
  }
  std::sort(entries.begin(), entries.end());
  PathSegment segment;
  for (auto [slot, state] : entries) {
    if (!segment.slots.empty() && segment.slots.back() == slot)
      throw std::invalid_argument("segment lists a node twice");
    segment.slots.push_back(slot);
    segment.states.push_back(state);
  }
  return segment;
}

namespace {

void check_segment(const InfluenceDiagram& diagram, const PathSegment& segment) {
  if (segment.slots.size() != segment.states.size()) throw std::invalid_argument("segment slots/states mismatch");
  for (std::size_t k = 0; k < segment.slots.size(); ++k) {
    const int slot = segment.slots[k];
    if (slot < 0 || static_cast<std::size_t>(slot) >= diagram.slot_count())
      throw std::invalid_argument("segment slot outside C u D");
    if (segment.states[k] < 0 || segment.states[k] >= diagram.state_count(diagram.slot_node(static_cast<std::size_t>(slot))))
      throw std::out_of_range("segment state out of range");
  }
}

/// Calls fn(path) for every path agreeing with the segment.
template <typename Fn>
void for_each_path_in_extension(const InfluenceDiagram& diagram, const PathSegment& segment, Fn&& fn) {
  std::vector<bool> fixed(diagram.slot_count(), false);
  Path path(diagram.slot_count(), 0);
  for (std::size_t k = 0; k < segment.slots.size(); ++k) {
    fixed[static_cast<std::size_t>(segment.slots[k])] = true;
    path[static_cast<std::size_t>(segment.slots[k])] = segment.states[k];
  }
  std::vector<int> free_slots, radices;
  for (std::size_t s = 0; s < diagram.slot_count(); ++s) {
    if (fixed[s]) continue;
    free_slots.push_back(static_cast<int>(s));
    radices.push_back(diagram.state_count(diagram.slot_node(s)));
  }
  const MixedRadix radix(std::move(radices));
  std::vector<int> digits(free_slots.size(), 0);
  do {
    for (std::size_t k = 0; k < free_slots.size(); ++k) path[static_cast<std::size_t>(free_slots[k])] = digits[k];
    fn(std::as_const(path));
  } while (radix.increment(digits));
}

}  // namespace

std::vector<std::vector<int>> extension(const InfluenceDiagram& diagram, const PathSegment& segment,
                                        ExtensionMode mode) {
  check_segment(diagram, segment);
  std::vector<std::vector<int>> result;
  if (mode != ExtensionMode::observable) {
    for_each_path_in_extension(diagram, segment, [&](const Path& path) {
      if (mode == ExtensionMode::all || path_probability(diagram, path) > 0.0) result.push_back(path);
    });
    return result;
  }

  const auto observed = diagram.observation_set();
  std::vector<int> position(diagram.slot_count(), -1);
  for (std::size_t k = 0; k < observed.size(); ++k)
    position[static_cast<std::size_t>(diagram.slot_of(observed[k]))] = static_cast<int>(k);
  for (int slot : segment.slots)
    if (position[static_cast<std::size_t>(slot)] < 0)
      throw std::invalid_argument(diagram.node(diagram.slot_node(static_cast<std::size_t>(slot))).name +
                                  " is not in the observation set");
  for (const auto& digits : observable_segments(diagram)) {
    bool agrees = true;
    for (std::size_t k = 0; k < segment.slots.size() && agrees; ++k)
      agrees = digits[static_cast<std::size_t>(position[static_cast<std::size_t>(segment.slots[k])])] == segment.states[k];
    if (agrees) result.push_back(digits);
  }
  return result;
}

double segment_expected_utility(const InfluenceDiagram& diagram, const PathSegment& segment) {
  check_segment(diagram, segment);
  double total = 0.0;
  for_each_path_in_extension(diagram, segment, [&](const Path& path) {
    const double p = path_probability(diagram, path);
    if (p != 0.0) total += p * path_utility(diagram, path);
  });
  return total;
}

double quantize_utility(double value, double grid) {
  if (!(grid > 0.0)) return value;
  return std::round(value / grid) * grid;
}

UtilityLevels utility_levels_from_values(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  UtilityLevels result;
  result.levels = std::move(values);
  if (result.levels.size() < 2) {
    result.epsilon = 1.0;
    return result;
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < result.levels.size(); ++i) gap = std::min(gap, result.levels[i] - result.levels[i - 1]);
  result.epsilon = 0.5 * gap;
  return result;
}

UtilityLevels utility_levels(const InfluenceDiagram& diagram, double grid) {
  std::vector<double> values;
  for (const auto& path : enumerate_paths(diagram)) values.push_back(quantize_utility(path_utility(diagram, path), grid));
  return utility_levels_from_values(std::move(values));
}

double segment_utility_mass(const InfluenceDiagram& diagram, const PathSegment& segment, double level, double grid) {
  check_segment(diagram, segment);
  double mass = 0.0;
  for_each_path_in_extension(diagram, segment, [&](const Path& path) {
    if (quantize_utility(path_utility(diagram, path), grid) == level) mass += path_probability(diagram, path);
  });
  return mass;
}

namespace {

struct SegmentAccumulator {
  double probability = 0.0;
  double expected_utility = 0.0;
  std::uint64_t positive = 0;
  double min_utility = std::numeric_limits<double>::infinity();
  double max_utility = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> masses;  // (utility, mass), merged
};

SegmentAccumulator accumulate_segment(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                      std::uint64_t segment, const std::vector<int>& free_slots,
                                      const MixedRadix& free_radix, double grid) {
  SegmentAccumulator acc;
  Path path(diagram.slot_count(), 0);
  std::vector<int> digits(stats.observation_slots.size());
  stats.segment_radix.decode(segment, digits);
  for (std::size_t k = 0; k < digits.size(); ++k)
    path[static_cast<std::size_t>(stats.observation_slots[k])] = digits[k];

  std::vector<int> free_digits(free_slots.size(), 0);
  std::vector<std::pair<double, double>> raw;
  raw.reserve(free_radix.size());
  do {
    for (std::size_t k = 0; k < free_slots.size(); ++k) path[static_cast<std::size_t>(free_slots[k])] = free_digits[k];
    const double p = path_probability(diagram, path);
    const double u = path_utility(diagram, path);
    acc.min_utility = std::min(acc.min_utility, u);
    acc.max_utility = std::max(acc.max_utility, u);
    acc.probability += p;
    if (p > 0.0) {
      ++acc.positive;
      acc.expected_utility += p * u;
    }
    raw.emplace_back(quantize_utility(u, grid), p);
  } while (free_radix.increment(free_digits));

  // Stable sort keeps the per-level summation in path order.
  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [u, p] : raw) {
    if (!acc.masses.empty() && acc.masses.back().first == u) acc.masses.back().second += p;
    else acc.masses.emplace_back(u, p);
  }
  return acc;
}

}  // namespace

PathStatistics compute_path_statistics(const InfluenceDiagram& diagram, const StatisticsOptions& options) {
  PathStatistics stats;
  for (int n : diagram.observation_set()) {
    stats.observation_nodes.push_back(n);
    stats.observation_slots.push_back(diagram.slot_of(n));
  }
  stats.segment_radix = observable_radix(diagram);
  stats.path_count = diagram.path_radix().size();

  std::vector<int> free_slots, free_radices;
  {
    std::vector<bool> observed(diagram.slot_count(), false);
    for (int s : stats.observation_slots) observed[static_cast<std::size_t>(s)] = true;
    for (std::size_t s = 0; s < diagram.slot_count(); ++s) {
      if (observed[s]) continue;
      free_slots.push_back(static_cast<int>(s));
      free_radices.push_back(diagram.state_count(diagram.slot_node(s)));
    }
  }
  const MixedRadix free_radix(std::move(free_radices));

  const std::uint64_t count = stats.segment_radix.size();
  std::vector<SegmentAccumulator> results(count);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
  const std::uint64_t chunks = (count + chunk - 1) / chunk;
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, chunks)));

  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t begin = c * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(count, begin + chunk);
      for (std::uint64_t g = begin; g < end; ++g)
        results[g] = accumulate_segment(diagram, stats, g, free_slots, free_radix, options.utility_grid);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Deterministic merge in segment order.
  stats.segment_probability.resize(count);
  stats.segment_expected_utility.resize(count);
  stats.segment_positive_paths.resize(count);
  stats.min_utility = std::numeric_limits<double>::infinity();
  stats.max_utility = -std::numeric_limits<double>::infinity();
  std::vector<double> all_levels;
  for (std::uint64_t g = 0; g < count; ++g) {
    const auto& r = results[g];
    stats.segment_probability[g] = r.probability;
    stats.segment_expected_utility[g] = r.expected_utility;
    stats.segment_positive_paths[g] = r.positive;
    stats.positive_path_count += r.positive;
    stats.min_utility = std::min(stats.min_utility, r.min_utility);
    stats.max_utility = std::max(stats.max_utility, r.max_utility);
    for (const auto& [u, p] : r.masses) all_levels.push_back(u);
  }
  stats.levels = utility_levels_from_values(std::move(all_levels));

  stats.segment_level_mass.resize(count);
  const auto& levels = stats.levels.levels;
  for (std::uint64_t g = 0; g < count; ++g) {
    auto& out = stats.segment_level_mass[g];
    out.reserve(results[g].masses.size());
    for (const auto& [u, p] : results[g].masses) {
      const auto pos = std::lower_bound(levels.begin(), levels.end(), u) - levels.begin();
      out.emplace_back(static_cast<int>(pos), p);
    }
    results[g].masses.clear();
    results[g].masses.shrink_to_fit();
  }
  return stats;
}

}  // namespace idmilp
