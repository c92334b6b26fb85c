#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "idmilp/bench.hpp"
#include "idmilp/diagram.hpp"
#include "idmilp/diagram_io.hpp"
#include "idmilp/formulations.hpp"
#include "idmilp/generators.hpp"
#include "idmilp/lp_format.hpp"
#include "idmilp/paths.hpp"
#include "idmilp/rng.hpp"
#include "idmilp/solve.hpp"

using namespace idmilp;
using nlohmann::json;

namespace {

struct ModelFlags {
  std::string formulation = "dpr";
  double alpha = 1.0;
  bool no_cuts = false;
  bool equality_cuts = false;
  bool filter_zero = false;
  double grid = 0.0;
  std::vector<std::string> chance_files;

  void attach(CLI::App* cmd) {
    cmd->add_option("--formulation", formulation, "dp, dpr or cvar")->check(CLI::IsMember({"dp", "dpr", "cvar"}));
    cmd->add_option("--alpha", alpha, "CVaR level in (0, 1]");
    cmd->add_flag("--no-cuts", no_cuts, "omit the valid inequalities over E_O(s_CI)");
    cmd->add_flag("--equality-cuts", equality_cuts, "state the cuts as equalities");
    cmd->add_flag("--filter-zero", filter_zero, "drop segments without positive-probability paths");
    cmd->add_option("--grid", grid, "quantize utilities to this grid before level grouping");
    cmd->add_option("--chance", chance_files, "chance constraint JSON file (repeatable)");
  }

  DprOptions dpr() const { return {!no_cuts, equality_cuts, filter_zero}; }
};

json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(file + ": " + e.what());
  }
}

InfluenceDiagram load_diagram(const std::string& file) { return InfluenceDiagram::build(load_definition(file)); }

std::vector<ChanceConstraintSpec> load_chance(const InfluenceDiagram& diagram, const std::vector<std::string>& files) {
  std::vector<ChanceConstraintSpec> specs;
  for (const auto& f : files) specs.push_back(chance_spec_from_json(diagram, read_json(f)));
  return specs;
}

BuiltModel build_model(const InfluenceDiagram& diagram, const PathStatistics& stats, const ModelFlags& flags,
                       const std::vector<ChanceConstraintSpec>& chance) {
  BuiltModel built = [&] {
    switch (formulation_from_string(flags.formulation)) {
      case Formulation::dp:
        return build_dp_model(diagram);
      case Formulation::dpr:
        return build_dpr_model(diagram, stats, flags.dpr());
      case Formulation::cvar:
        return build_cvar_model(diagram, stats, flags.alpha);
    }
    throw std::logic_error("unreachable");
  }();
  for (const auto& spec : chance) add_chance_constraint(diagram, built, spec);
  return built;
}

void write_text(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file);
}

std::string sidecar_name(const std::string& lp) {
  const auto ends_with_lp = lp.size() >= 3 && lp.compare(lp.size() - 3, 3, ".lp") == 0;
  return (ends_with_lp ? lp.substr(0, lp.size() - 3) : lp) + ".map.json";
}

int cmd_validate(const std::string& file) {
  const auto report = validate_diagram(load_definition(file));
  for (const auto& f : report.findings) std::cout << f.node << ": " << f.category << ": " << f.message << '\n';
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  return report.ok() ? 0 : 1;
}

int cmd_info(const std::string& file, double grid) {
  const auto diagram = load_diagram(file);
  StatisticsOptions options;
  options.utility_grid = grid;
  const auto stats = compute_path_statistics(diagram, options);
  json out{{"nodes", diagram.node_count()},
           {"paths", stats.path_count},
           {"positive_paths", stats.positive_path_count},
           {"observable_segments", stats.segment_count()},
           {"observation_set", observation_set(diagram)},
           {"utility_levels", stats.levels.levels.size()},
           {"min_utility", stats.min_utility},
           {"max_utility", stats.max_utility}};
  try {
    out["strategies"] = strategy_space_size(diagram);
  } catch (const StrategyCountOverflow&) {
    out["strategies"] = nullptr;
  }
  out["strategies_log2"] = strategy_space_log2(diagram);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_build(const std::string& file, const ModelFlags& flags, const std::string& out) {
  const auto diagram = load_diagram(file);
  StatisticsOptions options;
  options.utility_grid = flags.grid;
  const auto stats = compute_path_statistics(diagram, options);
  const auto built = build_model(diagram, stats, flags, load_chance(diagram, flags.chance_files));
  write_text(out, export_lp(built.model));
  write_text(sidecar_name(out), json(built.map).dump(2) + "\n");
  return 0;
}

int cmd_solve(const std::string& file, const ModelFlags& flags, const std::string& solver, std::uint64_t cap,
              double time_limit) {
  const auto diagram = load_diagram(file);
  const auto formulation = formulation_from_string(flags.formulation);
  const auto chance = load_chance(diagram, flags.chance_files);
  StatisticsOptions statistics;
  statistics.utility_grid = flags.grid;

  SolveResult result;
  if (solver == "enum") {
    EnumerationOptions options;
    if (formulation == Formulation::cvar) options.objective = Objective::cvar(flags.alpha);
    options.chance = chance;
    options.cap = cap;
    options.time_limit = time_limit;
    options.statistics = statistics;
    result = solve_by_enumeration(diagram, options);
  } else if (solver == "bnb") {
    if (formulation == Formulation::cvar) throw std::invalid_argument("branch and bound solves expected utility only");
    if (!chance.empty()) throw std::invalid_argument("branch and bound does not support chance constraints");
    BranchAndBoundOptions options;
    options.time_limit = time_limit;
    options.statistics = statistics;
    result = solve_branch_and_bound(diagram, options);
  } else {
    std::string command;
    if (solver == "backend") command = default_backend_command();
    else if (solver.rfind("backend:", 0) == 0) command = solver.substr(8);
    else if (solver != "model") throw std::invalid_argument("unknown solver '" + solver + "'");
    if (solver != "model" && command.empty())
      throw std::invalid_argument("no backend command (use backend:<cmd> or set ID_MILP_BACKEND)");
    const auto start = std::chrono::steady_clock::now();
    const auto stats = compute_path_statistics(diagram, statistics);
    const auto built = build_model(diagram, stats, flags, chance);
    const double preprocess = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double remaining = time_limit < 0.0 ? -1.0 : time_limit - preprocess;
    if (time_limit >= 0.0 && remaining <= 0.0) {
      result.status = SolveStatus::timeout;
    } else if (solver == "model") {
      result = solve_model_with_link_solver(diagram, built, {remaining});
    } else {
      result = solve_model_with_backend(diagram, built, {command, remaining});
    }
    result.timing.preprocess = preprocess;
    result.timing.finish();
  }
  auto out = to_json(diagram, result);
  out["formulation"] = flags.formulation;
  out["solver"] = solver;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_generate(const std::string& family, int size, std::uint64_t seed, const std::string& out) {
  save_definition(generate({family_from_string(family), size, seed}), out);
  return 0;
}

int cmd_discretize(std::size_t samples, int states, std::uint64_t seed, bool te_uses_ts, const std::string& out) {
  auto params = sample_turbine_params(derive_seed(seed, 0));
  params.te_mean_uses_ts = te_uses_ts;
  const auto paths = turbine_continuous_sample(params, samples, derive_seed(seed, 1));
  save_definition(discretize_from_samples(paths, default_breakpoints(states), params), out);
  return 0;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) parts.push_back(item);
  return parts;
}

int cmd_bench(BenchConfig config, const std::string& sizes, const std::string& formulations,
              const std::string& csv_file) {
  for (const auto& s : split(sizes)) config.sizes.push_back(std::stoi(s));
  for (const auto& f : split(formulations)) config.formulations.push_back(formulation_from_string(f));
  if (config.sizes.empty()) throw std::invalid_argument("no sizes given");
  if (config.formulations.empty()) throw std::invalid_argument("no formulations given");
  if (config.solver == "backend") config.solver = "backend:" + default_backend_command();
  const auto records = run_bench(config);

  std::ostringstream csv;
  csv << bench_csv_header() << '\n';
  for (const auto& r : records) csv << bench_csv_row(r) << '\n';
  const auto table = format_aggregates(aggregate_bench(records));
  if (csv_file.empty()) {
    std::cout << csv.str();
    std::cerr << table;
  } else {
    write_text(csv_file, csv.str());
    std::cout << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence diagrams as mixed-integer linear programs"};
  app.require_subcommand(1);

  std::string file, out, solver = "enum", family = "oil", sizes = "1", formulations = "dp,dpr", csv;
  ModelFlags flags;
  double grid = 0.0, time_limit = -1.0;
  std::uint64_t cap = 1'000'000, seed = 0;
  int size = 1, states = 4;
  std::size_t samples = 100000;
  bool te_uses_ts = false;
  BenchConfig bench;
  bench.workers = std::max(1u, std::thread::hardware_concurrency());

  auto* validate = app.add_subcommand("validate", "check a diagram file; exit 1 on findings");
  validate->add_option("file", file)->required();

  auto* info = app.add_subcommand("info", "structural counts as JSON");
  info->add_option("file", file)->required();
  info->add_option("--grid", grid, "quantize utilities before counting levels");

  auto* generate_cmd = app.add_subcommand("generate", "write a seeded benchmark instance");
  generate_cmd->add_option("--family", family)->check(CLI::IsMember({"oil", "turbine", "water"}));
  generate_cmd->add_option("--size", size, "tests (oil) or states per chance node");
  generate_cmd->add_option("--seed", seed);
  generate_cmd->add_option("--out", out)->required();

  auto* build = app.add_subcommand("build", "export a MILP in LP format plus a variable map");
  build->add_option("file", file)->required();
  flags.attach(build);
  build->add_option("--out", out)->required();

  ModelFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "solve a diagram and print the result as JSON");
  solve->add_option("file", file)->required();
  solve_flags.attach(solve);
  solve->add_option("--solver", solver, "enum, bnb, model, backend or backend:<command>");
  solve->add_option("--cap", cap, "enumeration strategy cap");
  solve->add_option("--time-limit", time_limit, "seconds");

  auto* discretize = app.add_subcommand("discretize", "sample the continuous turbine and discretize it");
  discretize->add_option("--samples", samples);
  discretize->add_option("--breakpoints", states, "number of states, 2 to 6");
  discretize->add_option("--seed", seed);
  discretize->add_flag("--te-uses-ts", te_uses_ts, "condition the TE mean on TS");
  discretize->add_option("--out", out)->required();

  std::string bench_family = "oil", bench_solver = "enum";
  auto* bench_cmd = app.add_subcommand("bench", "benchmark formulations over seeded instances");
  bench_cmd->add_option("--family", bench_family)->check(CLI::IsMember({"oil", "turbine", "water"}));
  bench_cmd->add_option("--sizes", sizes, "comma-separated");
  bench_cmd->add_option("--instances", bench.instances);
  bench_cmd->add_option("--formulations", formulations, "comma-separated dp,dpr,cvar");
  bench_cmd->add_option("--solver", bench_solver, "enum, bnb, model, backend or backend:<command>");
  bench_cmd->add_option("--time-limit", bench.time_limit, "seconds per record, build plus solve");
  bench_cmd->add_option("--seed0", bench.seed0);
  bench_cmd->add_option("--alpha", bench.alpha);
  bench_cmd->add_option("--cap", bench.enumeration_cap);
  bench_cmd->add_option("--workers", bench.workers);
  bench_cmd->add_option("--csv", csv, "write records here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(file);
    if (*info) return cmd_info(file, grid);
    if (*generate_cmd) return cmd_generate(family, size, seed, out);
    if (*build) return cmd_build(file, flags, out);
    if (*solve) return cmd_solve(file, solve_flags, solver, cap, time_limit);
    if (*discretize) return cmd_discretize(samples, states, seed, te_uses_ts, out);
    if (*bench_cmd) {
      bench.family = family_from_string(bench_family);
      bench.solver = bench_solver;
      return cmd_bench(bench, sizes, formulations, csv);
    }
  } catch (const std::exception& e) {
    std::string message = e.what();
    for (auto& c : message)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << message << '\n';
    return 1;
  }
  return 1;
}
