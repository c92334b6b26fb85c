#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "idmilp/diagram.hpp"
#include "idmilp/model.hpp"
#include "idmilp/paths.hpp"

namespace idmilp {

enum class Formulation { dp, dpr, cvar };

std::string_view to_string(Formulation f);
Formulation formulation_from_string(std::string_view text);

class ModelTooLarge : public std::runtime_error {
 public:
  ModelTooLarge(std::uint64_t count, std::uint64_t cap);
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_;
};

struct BuildOptions {
  double utility_shift = kUtilityShift;  // ε of U^> = U - min U + ε
  std::uint64_t max_path_variables = 5'000'000;
  StatisticsOptions statistics;
};

struct DprOptions {
  bool with_cuts = true;
  bool cuts_as_equalities = false;
  bool filter_zero_segments = false;
};

/// Semantic slot -> model variable name, plus the constants a reader needs
/// to interpret a solution (utility shift, CVaR level data).
struct VariableMap {
  Formulation formulation = Formulation::dpr;
  std::vector<std::string> decisions;  // decision node names by ordinal
  /// z[d][info][alt]
  std::vector<std::vector<std::vector<std::string>>> z;
  /// DP: x name and the path index (position in S) it stands for.
  std::vector<std::string> x;
  std::vector<std::uint64_t> x_paths;
  /// DPR/CVaR: y name and its observable-segment index.
  std::vector<std::string> y;
  std::vector<std::uint64_t> y_segments;
  std::vector<std::string> observation_nodes;

  std::vector<double> levels;
  std::vector<std::string> lam, lambar, rho, rhobar;
  std::string eta;
  double alpha = 1.0;
  double big_m = 0.0;
  double cvar_epsilon = 0.0;

  /// Added to every utility in the objective; an EU model's optimum equals
  /// EU + utility_shift. Zero for CVaR models.
  double utility_shift = 0.0;
  /// Names of the rows bounding y over E_O(s_{C_I}).
  std::vector<std::string> cut_rows;
};

void to_json(nlohmann::json& j, const VariableMap& map);
void from_json(const nlohmann::json& j, VariableMap& map);

struct BuiltModel {
  MilpModel model;
  VariableMap map;
};

/// min(|E^>(s_d, s_I(d))|, |E(s_d, s_I(d))| / ∏_{k∈D∖({d}∪I(d))} |S_k|),
/// counted directly from the diagram.
double gamma_bound(const InfluenceDiagram& diagram, int decision_node, int alternative, std::uint64_t info);

BuiltModel build_dp_model(const InfluenceDiagram& diagram, const BuildOptions& options = {});

/// Throws std::invalid_argument when equality cuts are combined with
/// zero-segment filtering.
BuiltModel build_dpr_model(const InfluenceDiagram& diagram, const PathStatistics& stats,
                           const DprOptions& dpr = {}, const BuildOptions& options = {});
BuiltModel build_dpr_model(const InfluenceDiagram& diagram, const DprOptions& dpr = {},
                           const BuildOptions& options = {});

/// CVaR maximization at level alpha ∈ (0, 1]; unshifted utilities, equality
/// cuts, no filtering. Levels come from stats (honouring its utility grid).
BuiltModel build_cvar_model(const InfluenceDiagram& diagram, const PathStatistics& stats, double alpha);
BuiltModel build_cvar_model(const InfluenceDiagram& diagram, double alpha, const BuildOptions& options = {});

struct ChanceConstraintSpec {
  std::vector<std::string> nodes;          // T ⊆ C ∪ D
  std::vector<std::vector<int>> states;    // 𝒮_T, each aligned with nodes
  double threshold = 1.0;                  // b_T
};

/// {"nodes": [...], "states": [[...], ...], "threshold": b}; states may be
/// given by label or by index.
ChanceConstraintSpec chance_spec_from_json(const InfluenceDiagram& diagram, const nlohmann::json& doc);

/// Throws std::invalid_argument on value nodes, unknown names, duplicate
/// nodes, out-of-range states or b_T outside [0, 1].
void check_chance_spec(const InfluenceDiagram& diagram, const ChanceConstraintSpec& spec);

/// Appends one ≤ row `cc[k]` limiting the probability of 𝒮_T. The weight of
/// an x(s) is p(s) when s_T ∈ 𝒮_T; the weight of a y(s_O) is the probability
/// of E(s_O) ∩ E(𝒮_T). The first call on a DP model, or on a DPR model
/// without equality cuts, also adds `chance_mass`: Σ p·x = 1 (Σ P(E(s_O))·y
/// = 1), which forces every compatible column with positive probability to
/// one.
void add_chance_constraint(const InfluenceDiagram& diagram, BuiltModel& built, const ChanceConstraintSpec& spec);

/// Probability that a path lands in 𝒮_T, as a per-path predicate.
class ChanceEvent {
 public:
  ChanceEvent(const InfluenceDiagram& diagram, const ChanceConstraintSpec& spec);
  bool contains(std::span<const int> path) const;

 private:
  std::vector<int> slots_;
  std::vector<std::vector<int>> states_;
};

}  // namespace idmilp
