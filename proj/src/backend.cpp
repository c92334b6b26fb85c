#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "idmilp/lp_format.hpp"
#include "idmilp/solve.hpp"

namespace idmilp {

BackendSolution parse_solution(std::string_view text) {
  BackendSolution solution;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_status = false, have_objective = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string key, value, extra;
    if (!(fields >> key)) continue;
    if (!(fields >> value) || (fields >> extra))
      throw std::runtime_error("unparseable solution line " + std::to_string(line_no) + ": " + line);
    if (key == "status") {
      solution.status = solve_status_from_string(value);
      have_status = true;
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw std::runtime_error("unparseable value on solution line " + std::to_string(line_no) + ": " + line);
    if (key == "objective") {
      solution.objective = v;
      have_objective = true;
    } else {
      solution.values[key] = v;
    }
  }
  if (!have_status) throw std::runtime_error("solution file lacks a status line");
  if (!have_objective && (solution.status == SolveStatus::optimal || solution.status == SolveStatus::feasible))
    throw std::runtime_error("solution file lacks an objective line");
  return solution;
}

void round_binaries(BackendSolution& solution, const MilpModel& model) {
  if (solution.status != SolveStatus::optimal && solution.status != SolveStatus::feasible) return;
  for (const auto& v : model.variables()) {
    if (v.type != VarType::binary) continue;
    auto it = solution.values.find(v.name);
    if (it == solution.values.end()) {
      solution.values[v.name] = 0.0;  // omitted columns are zero
      continue;
    }
    const double r = std::round(it->second);
    if ((r != 0.0 && r != 1.0) || std::abs(it->second - r) > 1e-6)
      throw std::runtime_error("non-integral binary " + v.name + " = " + std::to_string(it->second));
    it->second = r;
  }
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::filesystem::path scratch_directory() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto dir = base / ("idmilp-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    if (std::filesystem::create_directory(dir)) return dir;
  }
  throw std::runtime_error("cannot create a scratch directory for the backend");
}

}  // namespace

BackendSolution solve_with_backend(const MilpModel& model, const std::string& command, double time_limit) {
  if (command.empty()) throw std::invalid_argument("no backend command given (set ID_MILP_BACKEND)");
  const auto dir = scratch_directory();
  const auto lp = dir / "model.lp";
  const auto sol = dir / "solution.sol";
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};
  {
    std::ofstream out(lp);
    out << export_lp(model);
    if (!out) throw std::runtime_error("cannot write " + lp.string());
  }
  std::string line;
  if (time_limit > 0.0) line = "IDMILP_TIME_LIMIT=" + std::to_string(time_limit) + " ";
  line += command + " " + shell_quote(lp.string()) + " " + shell_quote(sol.string());
  const int rc = std::system(line.c_str());
  if (rc != 0) throw std::runtime_error("backend exited with status " + std::to_string(rc) + ": " + command);
  std::ifstream in(sol);
  if (!in) throw std::runtime_error("backend wrote no solution file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto solution = parse_solution(buffer.str());
  round_binaries(solution, model);
  return solution;
}

DecisionStrategy extract_strategy(const BackendSolution& solution, const VariableMap& map) {
  DecisionStrategy strategy;
  for (std::size_t d = 0; d < map.z.size(); ++d) {
    auto& rules = strategy.rules.emplace_back();
    for (std::size_t info = 0; info < map.z[d].size(); ++info) {
      int chosen = -1;
      for (std::size_t a = 0; a < map.z[d][info].size(); ++a) {
        auto it = solution.values.find(map.z[d][info][a]);
        const double v = it == solution.values.end() ? 0.0 : it->second;
        if (std::abs(v - 1.0) <= 1e-6) {
          if (chosen >= 0) throw std::runtime_error("invalid strategy: several ones in row z[" + std::to_string(d) +
                                                    "][" + std::to_string(info) + "]");
          chosen = static_cast<int>(a);
        } else if (std::abs(v) > 1e-6) {
          throw std::runtime_error("invalid strategy: non-integral " + map.z[d][info][a]);
        }
      }
      if (chosen < 0)
        throw std::runtime_error("invalid strategy: row z[" + std::to_string(d) + "][" + std::to_string(info) +
                                 "] has no selected alternative");
      rules.push_back(chosen);
    }
  }
  return strategy;
}

namespace {

void interpret(const InfluenceDiagram& diagram, const BuiltModel& built, const BackendSolution& solution,
               SolveResult& result) {
  result.status = solution.status;
  if (solution.status != SolveStatus::optimal && solution.status != SolveStatus::feasible) return;
  result.strategy = extract_strategy(solution, built.map);
  result.distribution = utility_distribution_of_strategy(diagram, result.strategy, 0.0);
  const bool cvar = built.map.formulation == Formulation::cvar;
  result.objective = cvar ? solution.objective : solution.objective - built.map.utility_shift;
  result.recomputed_objective = cvar ? cvar_of_distribution(result.distribution, built.map.alpha)
                                     : expected_utility_of_strategy(diagram, result.strategy);
}

}  // namespace

SolveResult solve_model_with_backend(const InfluenceDiagram& diagram, const BuiltModel& built,
                                     const BackendOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  SolveResult result;
  const auto solution = solve_with_backend(built.model, options.command, options.time_limit);
  result.timing.solve = std::chrono::duration<double>(Clock::now() - start).count();
  interpret(diagram, built, solution, result);
  result.timing.finish();
  return result;
}

SolveResult solve_model_with_link_solver(const InfluenceDiagram& diagram, const BuiltModel& built,
                                         const LinkSolverOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  SolveResult result;
  const auto solution = solve_link_structured(built.model, options);
  result.timing.solve = std::chrono::duration<double>(Clock::now() - start).count();
  interpret(diagram, built, solution, result);
  result.timing.finish();
  return result;
}

std::string default_backend_command() {
  const char* env = std::getenv("ID_MILP_BACKEND");
  return env ? env : "";
}

}  // namespace idmilp
