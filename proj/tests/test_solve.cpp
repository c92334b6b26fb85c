#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "idmilp/formulations.hpp"
#include "idmilp/solve.hpp"
#include "idmilp/strategy.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace idmilp;

namespace {

/// A backend that ignores the model and copies a canned solution file.
std::string canned_backend(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto sol = dir / (name + ".sol");
  std::ofstream(sol) << contents;
  return "sh -c 'cp \"" + sol.string() + "\" \"$2\"' backend";
}

}  // namespace

TEST_CASE("expected utility, distribution and CVaR of a strategy") {
  const auto def = support::oil(1, 4);
  const auto diagram = support::build(def);
  const oracle::Brute brute(def);
  int checked = 0;
  for_each_strategy(diagram, [&](const DecisionStrategy& s) {
    CHECK(expected_utility_of_strategy(diagram, s) == doctest::Approx(brute.expected_utility(s.rules)).epsilon(1e-12));
    const auto dist = utility_distribution_of_strategy(diagram, s);
    const auto expected = brute.distribution(s.rules);
    REQUIRE(dist.size() == expected.size());
    for (std::size_t k = 0; k < dist.size(); ++k) {
      CHECK(dist[k].first == expected[k].first);
      CHECK(dist[k].second == doctest::Approx(expected[k].second).epsilon(1e-12));
    }
    for (double alpha : {0.05, 0.3, 1.0})
      CHECK(cvar_of_distribution(dist, alpha) == doctest::Approx(oracle::cvar(expected, alpha)).epsilon(1e-10));
    return ++checked < 12;
  });
  CHECK(checked == 12);
}

TEST_CASE("CVaR of small distributions") {
  const UtilityDistribution two{{0.0, 0.5}, {10.0, 0.5}};
  CHECK(cvar_of_distribution(two, 0.75) == doctest::Approx(10.0 / 3.0));
  CHECK(cvar_of_distribution(two, 0.5) == doctest::Approx(0.0));
  CHECK(cvar_of_distribution(two, 1.0) == doctest::Approx(5.0));
  CHECK(cvar_of_distribution({{10.0, 0.5}, {0.0, 0.5}}, 0.75) == doctest::Approx(10.0 / 3.0));
  CHECK_THROWS_AS(cvar_of_distribution(two, 0.0), std::invalid_argument);
}

TEST_CASE("enumeration matches the brute-force optimum") {
  for (const auto& [def, count] : {std::pair{support::oil(1, 6), std::uint64_t{32}}, std::pair{support::water(3, 6), std::uint64_t{81}}}) {
    const auto diagram = support::build(def);
    const oracle::Brute brute(def);
    const auto best = oracle::best_expected_utility(brute);
    const auto r = solve_by_enumeration(diagram);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.search.leaves == count);
    CHECK(r.objective == doctest::Approx(best.value).epsilon(1e-12));
    CHECK(r.strategy.rules == best.rules);

    EnumerationOptions cv;
    cv.objective = Objective::cvar(0.25);
    const auto c = solve_by_enumeration(diagram, cv);
    CHECK(c.objective == doctest::Approx(oracle::best_cvar(brute, 0.25).value).epsilon(1e-10));
  }
}

TEST_CASE("enumeration with chance constraints") {
  const auto def = support::oil(1, 6);
  const auto diagram = support::build(def);
  const oracle::Brute brute(def);
  EnumerationOptions options;
  options.chance.push_back({{"D", "O"}, {{0, 0}}, 0.0});
  const auto r = solve_by_enumeration(diagram, options);
  const auto best = oracle::best_expected_utility_with_chance(brute, {"D", "O"}, {{0, 0}}, 0.0);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(best.value).epsilon(1e-12));

  // The event covers every path.
  EnumerationOptions impossible;
  impossible.chance.push_back({{"S"}, {{0}, {1}, {2}}, 0.5});
  CHECK(solve_by_enumeration(diagram, impossible).status == SolveStatus::infeasible);
}

TEST_CASE("enumeration stops at the cap and the time limit") {
  const auto diagram = support::build(support::oil(2));
  EnumerationOptions small;
  small.cap = 100;
  CHECK(solve_by_enumeration(diagram, small).status == SolveStatus::cap_exceeded);
  EnumerationOptions now;
  now.time_limit = 0.0;
  CHECK(solve_by_enumeration(diagram, now).status == SolveStatus::timeout);
  CHECK(solve_by_enumeration(support::build(support::oil(8)), {}).status == SolveStatus::cap_exceeded);
}

TEST_CASE("branch and bound agrees with enumeration") {
  for (const auto& def : {support::oil(1, 2), support::oil(2, 2), support::water(2, 2), support::water(3, 9)}) {
    const auto diagram = support::build(def);
    const auto e = solve_by_enumeration(diagram);
    const auto b = solve_branch_and_bound(diagram);
    REQUIRE(b.status == SolveStatus::optimal);
    CHECK(b.objective == doctest::Approx(e.objective).epsilon(1e-12));
    CHECK(b.search.leaves <= e.search.leaves);
  }
}

TEST_CASE("branch and bound bound dominates every completion") {
  const auto diagram = support::build(support::water(2, 4));
  const auto stats = compute_path_statistics(diagram);
  const StrategyBound bound(diagram, stats);
  const auto empty = empty_strategy(diagram);
  for_each_strategy(diagram, [&](const DecisionStrategy& s) {
    const double eu = expected_utility_of_strategy(diagram, s);
    CHECK(bound(s) == doctest::Approx(eu).epsilon(1e-12));
    CHECK(bound(empty) >= eu - 1e-12);
    DecisionStrategy partial = s;
    partial.rules.back().assign(partial.rules.back().size(), -1);
    CHECK(bound(partial) >= eu - 1e-12);
    return true;
  });
}

TEST_CASE("branch and bound on a single decision row never backtracks past the root") {
  DiagramDefinition def;
  def.nodes = {{"D", NodeKind::decision, {"a", "b", "c"}}, {"V", NodeKind::value, {}}};
  def.arcs = {{"D", "V"}};
  def.utilities["V"] = {2.0, 7.0, 5.0};
  const auto r = solve_branch_and_bound(support::build(def));
  CHECK(r.objective == 7.0);
  CHECK(r.strategy.rules == std::vector<std::vector<int>>{{1}});
  CHECK(r.search.backtracks == 0);
}

TEST_CASE("branch and bound limits") {
  const auto diagram = support::build(support::turbine(2));
  BranchAndBoundOptions now;
  now.time_limit = 0.0;
  CHECK(solve_branch_and_bound(diagram, now).status == SolveStatus::timeout);
  BranchAndBoundOptions few;
  few.node_limit = 3;
  const auto r = solve_branch_and_bound(diagram, few);
  CHECK((r.status == SolveStatus::feasible || r.status == SolveStatus::timeout));
}

TEST_CASE("backend solution files") {
  SUBCASE("parse") {
    const auto s = parse_solution("status optimal\nobjective 12.5\nz[0] 1\nx[3] 0.25\n");
    CHECK(s.status == SolveStatus::optimal);
    CHECK(s.objective == 12.5);
    CHECK(s.values.at("x[3]") == 0.25);
  }
  SUBCASE("infeasible") {
    const auto diagram = support::build(support::oil(1));
    const auto built = build_dpr_model(diagram);
    const auto r = solve_model_with_backend(diagram, built, {canned_backend("idmilp_infeasible", "status infeasible\n")});
    CHECK(r.status == SolveStatus::infeasible);
  }
  SUBCASE("fractional binary") {
    MilpModel m;
    m.add_binary("b");
    BackendSolution s;
    s.status = SolveStatus::optimal;
    s.values["b"] = 0.4;
    CHECK_THROWS_WITH_AS(round_binaries(s, m), doctest::Contains("non-integral binary"), std::runtime_error);
    s.values["b"] = 1.0 - 1e-8;
    round_binaries(s, m);
    CHECK(s.values["b"] == 1.0);
  }
  SUBCASE("strategy extraction") {
    const auto diagram = support::build(support::oil(1));
    const auto built = build_dp_model(diagram);
    BackendSolution s;
    s.status = SolveStatus::optimal;
    for (const auto& rows : built.map.z)
      for (const auto& alts : rows) s.values[alts[0]] = 1.0;
    const auto strategy = extract_strategy(s, built.map);
    for (const auto& rows : strategy.rules)
      for (int a : rows) CHECK(a == 0);
    s.values[built.map.z[0][0][1]] = 1.0;
    CHECK_THROWS_WITH_AS(extract_strategy(s, built.map), doctest::Contains("invalid strategy"), std::runtime_error);
    s.values[built.map.z[0][0][0]] = 0.0;
    s.values[built.map.z[0][0][1]] = 0.0;
    CHECK_THROWS_AS(extract_strategy(s, built.map), std::runtime_error);
  }
  SUBCASE("failing command") {
    MilpModel m;
    m.add_binary("b");
    CHECK_THROWS(solve_with_backend(m, "false"));
  }
}

TEST_CASE("HiGHS backend solves DP and DPR to the enumerated optimum") {
  for (const auto& def : {support::oil(1, 5), support::water(2, 5)}) {
    const auto diagram = support::build(def);
    const auto e = solve_by_enumeration(diagram);
    for (const auto& built : {build_dp_model(diagram), build_dpr_model(diagram)}) {
      const auto r = solve_model_with_backend(diagram, built, {support::highs_command()});
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(support::close(r.objective, e.objective));
      CHECK(support::close(r.recomputed_objective, e.objective));
    }
  }
}

TEST_CASE("link solver agrees with enumeration and with HiGHS") {
  for (const auto& def : {support::oil(1, 7), support::oil(2, 7), support::water(3, 7), support::turbine(2, 3)}) {
    const auto diagram = support::build(def);
    const auto e = solve_branch_and_bound(diagram);
    DprOptions eq;
    eq.cuts_as_equalities = true;
    DprOptions filter;
    filter.filter_zero_segments = true;
    for (const auto& built : {build_dp_model(diagram), build_dpr_model(diagram), build_dpr_model(diagram, eq),
                              build_dpr_model(diagram, filter)}) {
      const auto r = solve_model_with_link_solver(diagram, built);
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(support::close(r.objective, e.objective, 1e-9));
      CHECK(support::close(r.recomputed_objective, e.objective, 1e-9));
    }
  }
  const auto diagram = support::build(support::water(2, 7));
  const auto built = build_dpr_model(diagram);
  const auto link = solve_model_with_link_solver(diagram, built);
  const auto highs = solve_model_with_backend(diagram, built, {support::highs_command()});
  CHECK(support::close(link.objective, highs.objective));
}

TEST_CASE("link solver rejects models outside its structure") {
  const auto diagram = support::build(support::oil(1));
  CHECK_THROWS_AS(solve_link_structured(build_cvar_model(diagram, 0.5).model), std::invalid_argument);
  MilpModel general;
  const int a = general.add_binary("a");
  general.add_constraint("r", {{a, 2.0}}, RowSense::le, 1.0);
  CHECK_THROWS_AS(solve_link_structured(general), std::invalid_argument);
}

TEST_CASE("link solver limits") {
  const auto diagram = support::build(support::oil(1));
  CHECK(solve_link_structured(build_dp_model(diagram).model, {0.0}).status == SolveStatus::timeout);
}

TEST_CASE("result JSON") {
  const auto diagram = support::build(support::oil(1));
  const auto r = solve_by_enumeration(diagram);
  const auto j = to_json(diagram, r);
  CHECK(j.at("status") == "optimal");
  CHECK(j.at("objective").get<double>() == r.objective);
  CHECK(j.contains("strategy"));
  CHECK(j.contains("distribution"));
}
