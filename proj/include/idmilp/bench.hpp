#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idmilp/formulations.hpp"
#include "idmilp/generators.hpp"
#include "idmilp/solve.hpp"

namespace idmilp {

struct BenchRecord {
  std::string family;
  int size = 0;
  std::uint64_t seed = 0;
  std::string formulation;
  std::string solver;
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  double tau_p = 0.0;
  double tau_s = 0.0;
  double tau_t = 0.0;
};

struct BenchConfig {
  Family family = Family::oil;
  std::vector<int> sizes;
  int instances = 1;
  std::vector<Formulation> formulations;
  /// "enum", "bnb", "model" (link solver) or "backend:<command>".
  std::string solver = "enum";
  double time_limit = -1.0;  // on τ_t, seconds; negative means none
  std::uint64_t seed0 = 0;
  double alpha = 0.2;        // CVaR level for the cvar formulation
  std::uint64_t enumeration_cap = 1'000'000;
  unsigned workers = 1;
};

/// One record per (size, instance, formulation), seeds seed0 + i, sorted by
/// (family, size, seed, formulation).
std::vector<BenchRecord> run_bench(const BenchConfig& config);

/// Runs a single instance/formulation pair under the config's solver and
/// time limit.
BenchRecord bench_one(const BenchConfig& config, int size, std::uint64_t seed, Formulation formulation);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRecord& record);

struct BenchAggregate {
  int size = 0;
  std::string formulation;
  double mean_tau_t = 0.0;  // over optimal records only; NaN when none
  double mean_tau_s = 0.0;
  int optimal = 0;
  int feasible = 0;  // optimal plus records stopped with an incumbent
  int records = 0;
};

std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchRecord>& records);
std::string format_aggregates(const std::vector<BenchAggregate>& aggregates);

}  // namespace idmilp
