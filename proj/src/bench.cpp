#include "idmilp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <tuple>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace idmilp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

BenchRecord bench_one(const BenchConfig& config, int size, std::uint64_t seed, Formulation formulation) {
  BenchRecord record;
  record.family = std::string(to_string(config.family));
  record.size = size;
  record.seed = seed;
  record.formulation = std::string(to_string(formulation));
  record.solver = config.solver;

  const auto diagram = InfluenceDiagram::build(generate({config.family, size, seed}));
  const auto start = Clock::now();
  const auto stats = compute_path_statistics(diagram);
  std::optional<BuiltModel> built;
  switch (formulation) {
    case Formulation::dp:
      built = build_dp_model(diagram);
      break;
    case Formulation::dpr:
      built = build_dpr_model(diagram, stats);
      break;
    case Formulation::cvar:
      built = build_cvar_model(diagram, stats, config.alpha);
      break;
  }
  record.tau_p = elapsed(start);
  const double remaining = config.time_limit < 0.0 ? -1.0 : config.time_limit - record.tau_p;

  SolveResult result;
  if (config.time_limit >= 0.0 && remaining <= 0.0) {
    result.status = SolveStatus::timeout;
  } else if (config.solver == "enum") {
    EnumerationOptions options;
    if (formulation == Formulation::cvar) options.objective = Objective::cvar(config.alpha);
    options.cap = config.enumeration_cap;
    options.time_limit = remaining;
    result = solve_by_enumeration(diagram, stats, options);
  } else if (config.solver == "bnb") {
    if (formulation == Formulation::cvar) throw std::invalid_argument("branch and bound solves expected utility only");
    BranchAndBoundOptions options;
    options.time_limit = remaining;
    result = solve_branch_and_bound(diagram, stats, options);
  } else if (config.solver == "model") {
    result = solve_model_with_link_solver(diagram, *built, {remaining});
  } else if (config.solver.rfind("backend:", 0) == 0) {
    result = solve_model_with_backend(diagram, *built, {config.solver.substr(8), remaining});
  } else {
    throw std::invalid_argument("unknown solver '" + config.solver + "'");
  }
  record.tau_s = result.timing.solve;
  record.tau_t = record.tau_p + record.tau_s;
  if (config.time_limit >= 0.0 && record.tau_t > config.time_limit && result.status == SolveStatus::optimal)
    result.status = SolveStatus::feasible;
  record.status = result.status;
  record.objective = result.status == SolveStatus::optimal || result.status == SolveStatus::feasible
                         ? result.objective
                         : std::numeric_limits<double>::quiet_NaN();
  return record;
}

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  if (config.instances < 0) throw std::invalid_argument("instance count must be non-negative");
  struct Job {
    int size;
    std::uint64_t seed;
    Formulation formulation;
  };
  std::vector<Job> jobs;
  for (int size : config.sizes)
    for (int i = 0; i < config.instances; ++i)
      for (auto f : config.formulations) jobs.push_back({size, config.seed0 + static_cast<std::uint64_t>(i), f});

  std::vector<BenchRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        records[j] = bench_one(config, jobs[j].size, jobs[j].seed, jobs[j].formulation);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(jobs.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.family, a.size, a.seed, a.formulation) < std::tie(b.family, b.size, b.seed, b.formulation);
  });
  return records;
}

std::string bench_csv_header() { return "family,size,seed,formulation,solver,status,objective,tau_p,tau_s,tau_t"; }

std::string bench_csv_row(const BenchRecord& r) {
  std::string solver = r.solver;
  if (solver.find_first_of(",\"") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : solver) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    solver = quoted + "\"";
  }
  std::ostringstream out;
  out << r.family << ',' << r.size << ',' << r.seed << ',' << r.formulation << ',' << solver << ','
      << to_string(r.status) << ',' << (std::isnan(r.objective) ? std::string() : format_double(r.objective)) << ','
      << format_double(r.tau_p) << ',' << format_double(r.tau_s) << ',' << format_double(r.tau_t);
  return out.str();
}

std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchRecord>& records) {
  std::map<std::pair<int, std::string>, BenchAggregate> cells;
  for (const auto& r : records) {
    auto& a = cells[{r.size, r.formulation}];
    a.size = r.size;
    a.formulation = r.formulation;
    ++a.records;
    if (r.status == SolveStatus::optimal) {
      ++a.optimal;
      a.mean_tau_t += r.tau_t;
      a.mean_tau_s += r.tau_s;
    }
    if (r.status == SolveStatus::optimal || r.status == SolveStatus::feasible) ++a.feasible;
  }
  std::vector<BenchAggregate> out;
  for (auto& [key, a] : cells) {
    if (a.optimal > 0) {
      a.mean_tau_t /= a.optimal;
      a.mean_tau_s /= a.optimal;
    } else {
      a.mean_tau_t = a.mean_tau_s = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(a);
  }
  return out;
}

std::string format_aggregates(const std::vector<BenchAggregate>& aggregates) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%6s %-11s %12s %12s %6s %6s\n", "size", "formulation", "mean_tau_t", "mean_tau_s",
                "opt", "feas");
  out << line;
  for (const auto& a : aggregates) {
    std::snprintf(line, sizeof line, "%6d %-11s %12.6f %12.6f %6d %6d\n", a.size, a.formulation.c_str(), a.mean_tau_t,
                  a.mean_tau_s, a.optimal, a.feasible);
    out << line;
  }
  return out.str();
}

}  // namespace idmilp
