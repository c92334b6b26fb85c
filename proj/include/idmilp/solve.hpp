#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "idmilp/diagram.hpp"
#include "idmilp/formulations.hpp"
#include "idmilp/model.hpp"
#include "idmilp/paths.hpp"
#include "idmilp/strategy.hpp"

namespace idmilp {

enum class SolveStatus { optimal, feasible, infeasible, cap_exceeded, timeout };

std::string_view to_string(SolveStatus status);
SolveStatus solve_status_from_string(std::string_view text);

struct Timing {
  double preprocess = 0.0;  // τ_p: statistics and model build
  double solve = 0.0;       // τ_s
  double total = 0.0;       // τ_t = τ_p + τ_s

  void finish() { total = preprocess + solve; }
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::uint64_t backtracks = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  /// Unshifted expected utility, or CVaR for CVaR objectives.
  double objective = 0.0;
  /// Value of `strategy` recomputed by a direct path scan (backend routes);
  /// differs from objective when the model optimum is not attained by the
  /// extracted strategy.
  double recomputed_objective = std::numeric_limits<double>::quiet_NaN();
  DecisionStrategy strategy;
  UtilityDistribution distribution;
  Timing timing;
  SearchStats search;
};

nlohmann::json to_json(const InfluenceDiagram& diagram, const SolveResult& result);

struct Objective {
  enum class Kind { expected_utility, cvar };
  Kind kind = Kind::expected_utility;
  double alpha = 1.0;

  static Objective expected_utility() { return {}; }
  static Objective cvar(double alpha) { return {Kind::cvar, alpha}; }
};

struct EnumerationOptions {
  Objective objective;
  std::vector<ChanceConstraintSpec> chance;
  std::uint64_t cap = 1'000'000;
  double time_limit = -1.0;  // seconds; negative means none
  StatisticsOptions statistics;
};

/// Exhaustive oracle over all strategies in lexicographic order; strictly
/// better values replace the incumbent, so ties keep the first strategy.
/// Strategies whose chance-event probability exceeds b_T + 1e-9 are skipped.
SolveResult solve_by_enumeration(const InfluenceDiagram& diagram, const EnumerationOptions& options = {});
SolveResult solve_by_enumeration(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                 const EnumerationOptions& options);

inline constexpr double kChanceTolerance = 1e-9;

struct BranchAndBoundOptions {
  std::uint64_t node_limit = 0;  // 0 means unlimited
  double time_limit = -1.0;
  StatisticsOptions statistics;
};

/// Upper bound used by the branch and bound: for every assignment of the
/// observed chance nodes C_I, the best 𝔼_U over observable segments still
/// consistent with the fixed rows. A relaxation that lets the decision maker
/// see C_I in full, so it dominates every completion.
class StrategyBound {
 public:
  StrategyBound(const InfluenceDiagram& diagram, const PathStatistics& stats);
  /// Rules set to -1 are free.
  double operator()(const DecisionStrategy& partial) const;

 private:
  DecisionRowIndex rows_;
  SegmentRequirements segments_;
  std::vector<double> value_;
};

/// Depth-first branch and bound over decision rows (EU only). Returns
/// status feasible with the incumbent when a node or time limit stops it.
SolveResult solve_branch_and_bound(const InfluenceDiagram& diagram, const BranchAndBoundOptions& options = {});
SolveResult solve_branch_and_bound(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                   const BranchAndBoundOptions& options);

struct BackendSolution {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  std::map<std::string, double> values;
};

/// Reads `status <s>`, `objective <v>` and `name value` lines.
BackendSolution parse_solution(std::string_view text);

/// Rounds binaries of the model that lie within 1e-6 of 0 or 1; throws
/// std::runtime_error ("non-integral binary ...") otherwise.
void round_binaries(BackendSolution& solution, const MilpModel& model);

/// Writes the model as LP, runs `command <model.lp> <solution.sol>` through
/// the shell and parses the solution. A positive time limit is passed to
/// the backend as IDMILP_TIME_LIMIT.
BackendSolution solve_with_backend(const MilpModel& model, const std::string& command, double time_limit = -1.0);

/// One-hot z rows -> strategy; throws std::runtime_error ("invalid
/// strategy ...") when a row has no or several ones.
DecisionStrategy extract_strategy(const BackendSolution& solution, const VariableMap& map);

struct BackendOptions {
  std::string command;
  double time_limit = -1.0;
};

/// Solves a built model through the backend and reports the objective in
/// unshifted units (EU, or CVaR) next to a direct recompute of the extracted
/// strategy.
SolveResult solve_model_with_backend(const InfluenceDiagram& diagram, const BuiltModel& built,
                                     const BackendOptions& options);

struct LinkSolverOptions {
  double time_limit = -1.0;
};

/// Exact solver for models built from one-hot binary rows (Σ z = 1) and link
/// rows (Σ x - Γ z ≤ 0) over continuous columns in [0, u], with any further
/// rows checked at the leaves: the DP and DPR models without chance rows.
/// Branches on one-hot rows in model order; a leaf sets every column not
/// switched off by its links to u (c ≥ 0). Throws std::invalid_argument when
/// the model has another shape or a further row binds at an improving leaf.
BackendSolution solve_link_structured(const MilpModel& model, const LinkSolverOptions& options = {});

/// solve_model_with_backend with the link solver in place of an external
/// command.
SolveResult solve_model_with_link_solver(const InfluenceDiagram& diagram, const BuiltModel& built,
                                         const LinkSolverOptions& options = {});

/// Default backend command: ID_MILP_BACKEND if set, else empty.
std::string default_backend_command();

}  // namespace idmilp
