#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "idmilp/generators.hpp"
#include "idmilp/mixed_radix.hpp"

namespace idmilp {

ContinuousTurbineParams sample_turbine_params(std::uint64_t seed) {
  Rng rng(seed);
  ContinuousTurbineParams p;
  p.var_ss = rng.uniform(10.0, 100.0);
  p.var_ts = rng.uniform(10.0, 100.0);
  p.var_se = rng.uniform(10.0, 100.0);
  const double tr_a = rng.uniform(0.2, 10.0), tr_b = rng.uniform(0.2, 10.0);
  p.var_tr_sensor = std::max(tr_a, tr_b);
  p.var_tr_inspection = std::min(tr_a, tr_b);
  for (auto& v : p.var_tf) v = rng.uniform(0.2, 10.0);
  std::sort(p.var_tf.begin(), p.var_tf.end(), std::greater<>());
  p.cost_sensor = rng.uniform(0.0, 20.0);
  p.cost_inspection = rng.uniform(50.0, 300.0);
  p.cost_level1 = rng.uniform(100.0, 2000.0);
  p.cost_level2 = rng.uniform(3000.0, 8000.0);
  return p;
}

void check_turbine_params(const ContinuousTurbineParams& p) {
  auto within = [](double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi))
      throw std::invalid_argument(std::string("invalid variance range: ") + what + " outside its interval");
  };
  within(p.var_ss, 10.0, 100.0, "SS variance");
  within(p.var_ts, 10.0, 100.0, "TS variance");
  within(p.var_se, 10.0, 100.0, "SE variance");
  within(p.var_tr_sensor, 0.2, 10.0, "TR variance (sensor check)");
  within(p.var_tr_inspection, 0.2, 10.0, "TR variance (turbine inspection)");
  for (double v : p.var_tf) within(v, 0.2, 10.0, "TF variance");
  if (p.var_tr_sensor < p.var_tr_inspection)
    throw std::invalid_argument("invalid variance range: TR variance for s_I = 1 must be the larger");
  if (!(p.var_tf[0] >= p.var_tf[1] && p.var_tf[1] >= p.var_tf[2]))
    throw std::invalid_argument("invalid variance range: TF variances must decrease with s_M");
}

double turbine_reward(double flow) { return flow * flow * flow / 100.0; }

double turbine_decision_cost(const ContinuousTurbineParams& p, int inspection, int maintenance) {
  const double icost[3] = {0.0, p.cost_sensor, p.cost_inspection};
  const double mcost[3] = {0.0, p.cost_level1, p.cost_level2};
  return icost[inspection] + mcost[maintenance];
}

namespace {

double on_domain(Rng& rng, double mean, double variance) {
  return truncated_normal(rng, mean, std::sqrt(variance), 0.0, 100.0);
}

/// With probability weight/100 a normal draw, otherwise U(0, 100).
double mixture(Rng& rng, double weight, double mean, double variance) {
  if (rng.uniform() * 100.0 < weight) return on_domain(rng, mean, variance);
  return rng.uniform(0.0, 100.0);
}

SamplePath sample_one(const ContinuousTurbineParams& p, Rng& rng) {
  SamplePath s;
  s.fh = rng.uniform(0.0, 100.0);
  s.w = rng.uniform(0.0, 100.0);
  s.ss = on_domain(rng, 100.0 - s.fh, p.var_ss);
  s.ts = on_domain(rng, 100.0 - (s.fh + s.w) / 2.0, p.var_ts);
  s.se = mixture(rng, s.ts, s.ss, p.var_se);
  s.te = on_domain(rng, p.te_mean_uses_ts ? s.ts : s.ss, (100.0 - s.se) / 5.0);
  s.in = rng.index(3);
  s.sr = s.in == 0 ? s.se : on_domain(rng, s.ss, 1.0);
  if (s.in == 0) s.tr = s.te;
  else if (s.in == 1) s.tr = mixture(rng, s.sr, s.ts, p.var_tr_sensor);
  else s.tr = on_domain(rng, s.ts, p.var_tr_inspection);
  s.m = rng.index(3);
  const double sd = std::sqrt(p.var_tf[static_cast<std::size_t>(s.m)]);
  if (s.m == 0) s.tf = truncated_normal(rng, s.ts - 0.02 * s.w, sd, 0.0, s.ts);
  else if (s.m == 1) s.tf = truncated_normal(rng, s.ts + (100.0 - s.ts) / 2.0 - 0.02 * s.w, sd, s.ts, 100.0);
  else s.tf = truncated_normal(rng, 100.0, sd, s.ts, 100.0);
  s.utility = turbine_reward(s.tf) - turbine_decision_cost(p, s.in, s.m);
  return s;
}

constexpr std::size_t kSampleChunk = 4096;

}  // namespace

std::vector<SamplePath> turbine_continuous_sample(const ContinuousTurbineParams& params, std::size_t n,
                                                  std::uint64_t seed, unsigned workers) {
  if (n == 0) throw std::invalid_argument("need at least one sample");
  check_turbine_params(params);
  std::vector<SamplePath> samples(n);
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  auto fill = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < chunks; c += stride) {
      Rng rng(derive_seed(seed, c));
      const std::size_t end = std::min(n, (c + 1) * kSampleChunk);
      for (std::size_t i = c * kSampleChunk; i < end; ++i) samples[i] = sample_one(params, rng);
    }
  };
  unsigned count = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
  count = static_cast<unsigned>(std::min<std::size_t>(count, chunks));
  if (count <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(fill, w, count);
    for (auto& t : pool) t.join();
  }
  return samples;
}

std::vector<double> default_breakpoints(int states) {
  switch (states) {
    case 2:
      return {50.0};
    case 3:
      return {50.0, 75.0};
    case 4:
      return {25.0, 50.0, 75.0};
    case 5:
      return {25.0, 50.0, 75.0, 87.5};
    case 6:
      return {25.0, 50.0, 62.5, 75.0, 87.5};
    default:
      throw std::out_of_range("no default breakpoints for " + std::to_string(states) +
                              " states; supply custom breakpoints");
  }
}

int interval_index(double value, const std::vector<double>& breakpoints) {
  for (std::size_t i = 0; i < breakpoints.size(); ++i)
    if (value <= breakpoints[i]) return static_cast<int>(i);
  return static_cast<int>(breakpoints.size());
}

namespace {

std::string format_bound(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", v);
  return buffer;
}

std::vector<std::string> interval_labels(const std::vector<double>& breakpoints) {
  std::vector<std::string> out;
  double lo = 0.0;
  for (std::size_t i = 0; i <= breakpoints.size(); ++i) {
    const double hi = i < breakpoints.size() ? breakpoints[i] : 100.0;
    out.push_back((i == 0 ? "[" : "(") + format_bound(lo) + "," + format_bound(hi) + "]");
    lo = hi;
  }
  return out;
}

/// Discrete state of every node for one sample, indexed by node position in
/// the skeleton (value node left at 0).
std::vector<int> discretize_sample(const DiagramDefinition& def, const SamplePath& s,
                                   const std::vector<double>& breakpoints) {
  std::vector<int> states(def.nodes.size(), 0);
  for (std::size_t i = 0; i < def.nodes.size(); ++i) {
    const auto& name = def.nodes[i].name;
    double v = 0.0;
    if (name == "W") v = s.w;
    else if (name == "FH") v = s.fh;
    else if (name == "SS") v = s.ss;
    else if (name == "TS") v = s.ts;
    else if (name == "SE") v = s.se;
    else if (name == "TE") v = s.te;
    else if (name == "SR") v = s.sr;
    else if (name == "TR") v = s.tr;
    else if (name == "TF") v = s.tf;
    else if (name == "IN") {
      states[i] = s.in;
      continue;
    } else if (name == "M") {
      states[i] = s.m;
      continue;
    } else {
      continue;
    }
    states[i] = interval_index(v, breakpoints);
  }
  return states;
}

std::vector<int> parents_of(const DiagramDefinition& def, const std::string& node) {
  std::vector<int> parents;
  for (const auto& arc : def.arcs)
    if (arc.child == node)
      for (std::size_t i = 0; i < def.nodes.size(); ++i)
        if (def.nodes[i].name == arc.parent) parents.push_back(static_cast<int>(i));
  std::sort(parents.begin(), parents.end());
  return parents;
}

}  // namespace

DiagramDefinition discretize_from_samples(const std::vector<SamplePath>& samples,
                                          const std::vector<double>& breakpoints,
                                          const ContinuousTurbineParams& params) {
  if (samples.empty()) throw std::invalid_argument("discretization needs samples");
  if (breakpoints.empty()) throw std::invalid_argument("discretization needs at least one breakpoint");
  for (std::size_t i = 0; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > (i ? breakpoints[i - 1] : 0.0) && breakpoints[i] < 100.0))
      throw std::invalid_argument("breakpoints must increase strictly inside (0, 100)");

  const auto labels = interval_labels(breakpoints);
  auto def = turbine_skeleton(labels);
  std::vector<std::vector<int>> discrete;
  discrete.reserve(samples.size());
  for (const auto& s : samples) discrete.push_back(discretize_sample(def, s, breakpoints));

  for (std::size_t n = 0; n < def.nodes.size(); ++n) {
    const auto& node = def.nodes[n];
    if (node.kind == NodeKind::decision) continue;
    const auto parents = parents_of(def, node.name);
    std::vector<int> radices;
    for (int p : parents) radices.push_back(static_cast<int>(def.nodes[static_cast<std::size_t>(p)].states.size()));
    const MixedRadix radix(radices);
    std::vector<int> digits(parents.size());
    auto info_of = [&](const std::vector<int>& states) {
      for (std::size_t k = 0; k < parents.size(); ++k) digits[k] = states[static_cast<std::size_t>(parents[k])];
      return radix.index(digits);
    };

    if (node.kind == NodeKind::chance) {
      const std::size_t width = node.states.size();
      std::vector<std::vector<double>> counts(radix.size(), std::vector<double>(width, 0.0));
      for (const auto& states : discrete) counts[info_of(states)][static_cast<std::size_t>(states[n])] += 1.0;
      std::size_t empty = 0;
      for (auto& row : counts) {
        double total = 0.0;
        for (double c : row) total += c;
        if (total == 0.0) {
          std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(width));
          ++empty;
          continue;
        }
        for (auto& c : row) c /= total;
      }
      if (empty)
        def.notes.push_back(node.name + ": " + std::to_string(empty) + " of " + std::to_string(counts.size()) +
                            " information states unsampled; uniform rows used");
      def.cpts[node.name] = std::move(counts);
    } else {
      // Value node U with parents (IN, M, TF).
      std::vector<double> sum(radix.size(), 0.0), count(radix.size(), 0.0);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto info = info_of(discrete[i]);
        sum[info] += samples[i].utility;
        count[info] += 1.0;
      }
      std::vector<double> utility(radix.size());
      std::size_t empty = 0;
      std::vector<int> state(parents.size());
      for (std::uint64_t info = 0; info < radix.size(); ++info) {
        if (count[info] > 0.0) {
          utility[info] = sum[info] / count[info];
          continue;
        }
        radix.decode(info, state);
        const int bin = state[2];
        const double lo = bin == 0 ? 0.0 : breakpoints[static_cast<std::size_t>(bin - 1)];
        const double hi = static_cast<std::size_t>(bin) < breakpoints.size() ? breakpoints[static_cast<std::size_t>(bin)] : 100.0;
        utility[info] = turbine_reward(0.5 * (lo + hi)) - turbine_decision_cost(params, state[0], state[1]);
        ++empty;
      }
      if (empty)
        def.notes.push_back(node.name + ": " + std::to_string(empty) + " of " + std::to_string(utility.size()) +
                            " information states unsampled; f(interval midpoint) minus costs used");
      def.utilities[node.name] = std::move(utility);
    }
  }
  return def;
}

}  // namespace idmilp
