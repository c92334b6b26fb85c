#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "idmilp/diagram.hpp"
#include "idmilp/rng.hpp"

namespace idmilp {

enum class Family { oil, turbine, water };

std::string_view to_string(Family family);
Family family_from_string(std::string_view text);

struct GeneratorConfig {
  Family family = Family::oil;
  int size = 1;  // M tests (oil) or K states (turbine, water)
  std::uint64_t seed = 0;
};

/// row_count rows of state_count i.i.d. uniforms, each divided by its sum.
std::vector<std::vector<double>> random_cpt(std::size_t row_count, std::size_t state_count, Rng& rng);

/// Oil exploration with M tests. Node order: O, S, T1..TM, R1..RM, D,
/// C1..CM, U.
DiagramDefinition generate_oil(int tests, std::uint64_t seed);

/// Turbine inspection and maintenance with K states per chance node.
DiagramDefinition generate_turbine(int states, std::uint64_t seed);

/// Water management with K states. Node order: A, W1, W2, F, M, D, C, V.
DiagramDefinition generate_water(int states, std::uint64_t seed);

/// Throws std::invalid_argument when the size is below the family minimum.
DiagramDefinition generate(const GeneratorConfig& config);

/// Turbine structure (nodes and arcs) with the given state labels on every
/// chance node; tables left empty. Shared by the discrete generator and the
/// sample-based discretizer.
DiagramDefinition turbine_skeleton(const std::vector<std::string>& chance_states);

// ---- continuous turbine -------------------------------------------------

/// Instance parameters: variances (σ²) and decision costs.
struct ContinuousTurbineParams {
  double var_ss = 10.0, var_ts = 10.0, var_se = 10.0;  // each in [10, 100]
  double var_tr_sensor = 0.2;                          // s_I = 1, the larger of two draws from [0.2, 10]
  double var_tr_inspection = 0.2;                      // s_I = 2
  std::array<double, 3> var_tf{0.2, 0.2, 0.2};         // by s_M, descending
  double cost_sensor = 0.0;      // [0, 20]
  double cost_inspection = 50.0;  // [50, 300]
  double cost_level1 = 100.0;     // [100, 2000]
  double cost_level2 = 3000.0;    // [3000, 8000]
  /// The TE row prints mean s_SS; true switches to the s_TS reading.
  bool te_mean_uses_ts = false;
};

ContinuousTurbineParams sample_turbine_params(std::uint64_t seed);
/// Throws std::invalid_argument for variances outside their ranges or
/// misordered TR/TF variances.
void check_turbine_params(const ContinuousTurbineParams& params);

/// One sampled scenario; values in [0, 100], decisions in {0, 1, 2}.
struct SamplePath {
  double fh = 0, w = 0, ss = 0, ts = 0, se = 0, te = 0, sr = 0, tr = 0, tf = 0;
  int in = 0, m = 0;
  double utility = 0.0;
};

/// Flow reward f(s) = s³ / 100.
double turbine_reward(double flow);
double turbine_decision_cost(const ContinuousTurbineParams& params, int inspection, int maintenance);

/// n ancestral samples, decisions uniform. Chunks of samples use derived
/// seeds, so the result does not depend on the worker count.
std::vector<SamplePath> turbine_continuous_sample(const ContinuousTurbineParams& params, std::size_t n,
                                                  std::uint64_t seed, unsigned workers = 0);

/// Breakpoints for N = 2..6 states; throws std::out_of_range otherwise.
std::vector<double> default_breakpoints(int states);

/// Bin of a value: [0, b1], (b1, b2], ..., (b_last, 100].
int interval_index(double value, const std::vector<double>& breakpoints);

/// Count-ratio CPTs and mean utilities over the samples. Information states
/// without samples get a uniform row (CPTs) or f(bin midpoint) - costs
/// (utility); each fallback is recorded in the definition's notes.
DiagramDefinition discretize_from_samples(const std::vector<SamplePath>& samples,
                                          const std::vector<double>& breakpoints,
                                          const ContinuousTurbineParams& params);

}  // namespace idmilp
