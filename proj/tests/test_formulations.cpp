#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "idmilp/formulations.hpp"
#include "idmilp/lp_format.hpp"
#include "idmilp/solve.hpp"
#include "idmilp/strategy.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace idmilp;

namespace {

std::size_t rows_with_prefix(const MilpModel& model, std::string_view prefix) {
  return static_cast<std::size_t>(std::count_if(model.constraints().begin(), model.constraints().end(),
                                                [&](const Constraint& c) { return c.name.rfind(prefix, 0) == 0; }));
}

std::size_t columns_with_prefix(const MilpModel& model, std::string_view prefix) {
  return static_cast<std::size_t>(std::count_if(model.variables().begin(), model.variables().end(),
                                                [&](const Variable& v) { return v.name.rfind(prefix, 0) == 0; }));
}

const Constraint& row(const MilpModel& model, const std::string& name) {
  for (const auto& c : model.constraints())
    if (c.name == name) return c;
  throw std::runtime_error("no row " + name);
}

/// Column values as a dense vector from a name -> value assignment.
double objective_at(const MilpModel& model, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : model.objective()) v += t.coef * x[static_cast<std::size_t>(t.var)];
  return v;
}

bool feasible_at(const MilpModel& model, const std::vector<double>& x, double tol = 1e-9) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = model.variables()[j];
    if (x[j] < v.lower - tol || x[j] > v.upper + tol) return false;
  }
  for (const auto& c : model.constraints()) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    if (c.sense == RowSense::le && lhs > c.rhs + tol) return false;
    if (c.sense == RowSense::ge && lhs < c.rhs - tol) return false;
    if (c.sense == RowSense::eq && std::abs(lhs - c.rhs) > tol) return false;
  }
  return true;
}

/// The integer point a strategy induces: z one-hot, x / y the compatibility
/// indicators.
std::vector<double> induced_point(const InfluenceDiagram& diagram, const PathStatistics& stats, const BuiltModel& built,
                                  const DecisionStrategy& strategy) {
  std::vector<double> x(built.model.variables().size(), 0.0);
  const auto& map = built.map;
  for (std::size_t d = 0; d < map.z.size(); ++d)
    for (std::size_t i = 0; i < map.z[d].size(); ++i)
      x[static_cast<std::size_t>(built.model.variable_index(map.z[d][i][static_cast<std::size_t>(strategy.rules[d][i])]))] = 1.0;
  if (!map.x.empty()) {
    const auto positive = positive_path_set(diagram);
    const auto indicator = path_indicator(diagram, strategy);
    std::map<std::uint64_t, double> by_path;
    for (std::size_t k = 0; k < positive.size(); ++k) by_path[positive[k]] = indicator[k];
    for (std::size_t k = 0; k < map.x.size(); ++k)
      x[static_cast<std::size_t>(built.model.variable_index(map.x[k]))] = by_path.at(map.x_paths[k]);
  }
  if (!map.y.empty()) {
    const auto indicator = segment_indicator(diagram, stats, strategy);
    for (std::size_t k = 0; k < map.y.size(); ++k)
      x[static_cast<std::size_t>(built.model.variable_index(map.y[k]))] = indicator[map.y_segments[k]];
  }
  return x;
}

std::vector<DecisionStrategy> all_strategies(const InfluenceDiagram& diagram) {
  std::vector<DecisionStrategy> out;
  for_each_strategy(diagram, [&](const DecisionStrategy& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

}  // namespace

TEST_CASE("gamma bound") {
  SUBCASE("oil M=1, decision D") {
    const auto def = support::oil(1, 2);
    const auto diagram = support::build(def);
    const oracle::Brute brute(def);
    const int d = diagram.require_node("D");
    for (int a = 0; a < 2; ++a)
      for (std::uint64_t info = 0; info < 4; ++info) {
        std::uint64_t positive = 0, all = 0;
        brute.for_each_path([&](const std::vector<int>& s, double p, double) {
          if (s[static_cast<std::size_t>(brute.slot("D"))] != a || brute.info("D", s) != info) return;
          ++all;
          positive += p > 0.0;
        });
        CHECK(all == 18);
        CHECK(gamma_bound(diagram, d, a, info) == std::min<double>(static_cast<double>(positive), 9.0));
      }
  }
  SUBCASE("single decision: Γ = |E^>|, and |E| with positive CPTs") {
    DiagramDefinition def;
    def.nodes = {{"C", NodeKind::chance, {"a", "b", "c"}},
                 {"F", NodeKind::chance, {"u", "v"}},
                 {"D", NodeKind::decision, {"x", "y"}},
                 {"V", NodeKind::value, {}}};
    def.arcs = {{"C", "D"}, {"D", "V"}, {"F", "V"}};
    def.cpts["C"] = {{0.2, 0.3, 0.5}};
    def.cpts["F"] = {{0.0, 1.0}};
    def.utilities["V"] = {1, 2, 3, 4};
    auto diagram = support::build(def);
    const int d = diagram.require_node("D");
    for (std::uint64_t info = 0; info < 3; ++info) CHECK(gamma_bound(diagram, d, 0, info) == 1.0);
    def.cpts["F"] = {{0.5, 0.5}};
    diagram = support::build(def);
    for (std::uint64_t info = 0; info < 3; ++info) CHECK(gamma_bound(diagram, d, 1, info) == 2.0);
  }
}

TEST_CASE("DP model counts on oil M=1") {
  const auto built = build_dp_model(support::build(support::oil(1)));
  CHECK(columns_with_prefix(built.model, "z[") == 10);
  CHECK(rows_with_prefix(built.model, "strategy[") == 5);
  CHECK(rows_with_prefix(built.model, "link[") == 10);
  CHECK(columns_with_prefix(built.model, "x[") == 72);
  CHECK(built.model.binary_count() == 10);
}

TEST_CASE("DP objective coefficients are p(s)·U^>(s) over S^>") {
  const auto def = support::water(2, 13);
  const auto diagram = support::build(def);
  const auto built = build_dp_model(diagram);
  const oracle::Brute brute(def);
  const double shift = 1.0 - brute.min_utility();
  std::vector<double> expected;
  brute.for_each_path([&](const std::vector<int>&, double p, double u) {
    if (p > 0.0) expected.push_back(p * (u + shift));
  });
  REQUIRE(built.map.x.size() == expected.size());
  std::map<int, double> coef;
  for (const auto& t : built.model.objective()) coef[t.var] += t.coef;
  for (std::size_t k = 0; k < expected.size(); ++k)
    CHECK(coef[built.model.variable_index(built.map.x[k])] == doctest::Approx(expected[k]).epsilon(1e-13));
  CHECK(built.map.utility_shift == doctest::Approx(shift));
}

TEST_CASE("DP without decisions: only x columns; optimum is Σ p U^>") {
  DiagramDefinition def;
  def.nodes = {{"A", NodeKind::chance, {"a", "b"}}, {"B", NodeKind::chance, {"c", "d"}}, {"V", NodeKind::value, {}}};
  def.arcs = {{"A", "B"}, {"A", "V"}, {"B", "V"}};
  def.cpts["A"] = {{0.4, 0.6}};
  def.cpts["B"] = {{0.1, 0.9}, {0.7, 0.3}};
  def.utilities["V"] = {-3, 5, 8, 2};
  const auto diagram = support::build(def);
  const auto built = build_dp_model(diagram);
  CHECK(built.model.binary_count() == 0);
  CHECK(built.model.constraints().empty());
  const oracle::Brute brute(def);
  const double shift = 1.0 - brute.min_utility();
  double expected = 0.0;
  brute.for_each_path([&](const std::vector<int>&, double p, double u) { expected += p * (u + shift); });
  const auto solution = solve_link_structured(built.model);
  CHECK(solution.status == SolveStatus::optimal);
  CHECK(solution.objective == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("DPR model counts") {
  const auto oil = build_dpr_model(support::build(support::oil(1)));
  CHECK(oil.map.y.size() == 16);
  CHECK(oil.map.cut_rows.size() == 4);
  CHECK(columns_with_prefix(oil.model, "z[") == 10);
  CHECK(oil.model.constraints().size() == 5 + 10 + 4);

  const auto turbine = support::build(support::turbine(2));
  const auto dpr = build_dpr_model(turbine);
  const auto dp = build_dp_model(turbine);
  CHECK(dpr.map.y.size() == 288);
  CHECK(dp.map.x.size() <= 4608);
  CHECK(dpr.model.variables().size() < dp.model.variables().size());

  DprOptions no_cuts;
  no_cuts.with_cuts = false;
  CHECK(build_dpr_model(support::build(support::oil(1)), no_cuts).map.cut_rows.empty());
}

TEST_CASE("DPR filtering drops exactly the zero-probability segments") {
  const auto diagram = support::build(support::oil(1));
  const auto stats = compute_path_statistics(diagram);
  DprOptions filter;
  filter.filter_zero_segments = true;
  const auto built = build_dpr_model(diagram, stats, filter);
  std::size_t positive = 0;
  for (auto c : stats.segment_positive_paths) positive += c > 0;
  CHECK(built.map.y.size() == positive);
  CHECK(positive < 16);
}

TEST_CASE("DPR with O = C ∪ D is DP plus cut rows") {
  DiagramDefinition def;
  def.nodes = {{"C", NodeKind::chance, {"a", "b"}},
               {"D", NodeKind::decision, {"x", "y", "z"}},
               {"E", NodeKind::chance, {"p", "q"}},
               {"V", NodeKind::value, {}}};
  def.arcs = {{"C", "D"}, {"C", "E"}, {"D", "E"}, {"D", "V"}, {"E", "V"}};
  def.cpts["C"] = {{0.3, 0.7}};
  def.cpts["E"] = {{0.2, 0.8}, {0.5, 0.5}, {0.9, 0.1}, {0.6, 0.4}, {0.35, 0.65}, {0.25, 0.75}};
  def.utilities["V"] = {4, 1, -2, 6, 3, 0};
  // E is observed by nobody, so make a second decision observe it.
  def.nodes.insert(def.nodes.begin() + 3, {"G", NodeKind::decision, {"g0", "g1"}});
  def.arcs.push_back({"E", "G"});
  def.arcs.push_back({"G", "V"});
  def.utilities["V"] = {4, 1, -2, 6, 3, 0, 7, 2, 5, 1, 0, 8};
  const auto diagram = support::build(def);
  REQUIRE(diagram.observation_set().size() == diagram.slot_count());
  const auto dp = build_dp_model(diagram);
  const auto dpr = build_dpr_model(diagram);
  REQUIRE(dp.map.x.size() == dpr.map.y.size());
  std::map<int, double> c_dp, c_dpr;
  for (const auto& t : dp.model.objective()) c_dp[t.var] = t.coef;
  for (const auto& t : dpr.model.objective()) c_dpr[t.var] = t.coef;
  for (std::size_t k = 0; k < dp.map.x.size(); ++k) {
    CHECK(dp.map.x_paths[k] == dpr.map.y_segments[k]);
    CHECK(c_dp[dp.model.variable_index(dp.map.x[k])] ==
          doctest::Approx(c_dpr[dpr.model.variable_index(dpr.map.y[k])]).epsilon(1e-14));
  }
  CHECK(dpr.model.constraints().size() == dp.model.constraints().size() + dpr.map.cut_rows.size());
  for (const auto& c : dp.model.constraints()) {
    const auto& other = row(dpr.model, c.name);
    REQUIRE(other.terms.size() == c.terms.size());
    for (std::size_t k = 0; k < c.terms.size(); ++k) CHECK(other.terms[k].coef == c.terms[k].coef);
  }
}

TEST_CASE("DPR option conflicts are rejected") {
  const auto diagram = support::build(support::oil(1));
  DprOptions bad;
  bad.cuts_as_equalities = true;
  bad.filter_zero_segments = true;
  CHECK_THROWS_AS(build_dpr_model(diagram, bad), std::invalid_argument);
  DprOptions no_cuts;
  no_cuts.with_cuts = false;
  no_cuts.cuts_as_equalities = true;
  CHECK_THROWS_AS(build_dpr_model(diagram, no_cuts), std::invalid_argument);
}

TEST_CASE("path-variable cap") {
  BuildOptions tiny;
  tiny.max_path_variables = 10;
  CHECK_THROWS_AS(build_dp_model(support::build(support::oil(1)), tiny), ModelTooLarge);
}

TEST_CASE("every strategy's indicator point is feasible and scores EU + shift in DP and DPR") {
  for (const auto& def : {support::oil(1, 3), support::water(2, 3)}) {
    const auto diagram = support::build(def);
    const auto stats = compute_path_statistics(diagram);
    DprOptions eq;
    eq.cuts_as_equalities = true;
    DprOptions filtered;
    filtered.filter_zero_segments = true;
    const std::vector<BuiltModel> models{build_dp_model(diagram), build_dpr_model(diagram, stats),
                                         build_dpr_model(diagram, stats, eq),
                                         build_dpr_model(diagram, stats, filtered)};
    const oracle::Brute brute(def);
    for (const auto& strategy : all_strategies(diagram)) {
      const double eu = brute.expected_utility(strategy.rules);
      for (const auto& built : models) {
        const auto point = induced_point(diagram, stats, built, strategy);
        CHECK(feasible_at(built.model, point));
        CHECK(objective_at(built.model, point) - built.map.utility_shift == doctest::Approx(eu).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("CVaR model size and structure") {
  const auto diagram = support::build(support::water(2, 5));
  const auto stats = compute_path_statistics(diagram);
  const auto built = build_cvar_model(diagram, stats, 0.2);
  std::uint64_t z = 0;
  for (int d : diagram.decision_nodes()) z += diagram.info_count(d) * static_cast<std::uint64_t>(diagram.state_count(d));
  CHECK(built.model.variables().size() == stats.segment_count() + z + 4 * stats.levels.levels.size() + 1);
  CHECK(built.map.utility_shift == 0.0);
  CHECK(built.map.big_m == doctest::Approx(stats.levels.levels.back() - stats.levels.levels.front() + stats.levels.epsilon));
  CHECK(row(built.model, "alpha_mass").rhs == 0.2);
  CHECK_THROWS_AS(build_cvar_model(diagram, stats, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cvar_model(diagram, stats, 1.5), std::invalid_argument);
}

TEST_CASE("CVaR model optimum matches the brute-force CVaR oracle (HiGHS backend)") {
  const auto def = support::water(2, 8);
  const auto diagram = support::build(def);
  const auto stats = compute_path_statistics(diagram);
  const oracle::Brute brute(def);
  for (double alpha : {0.2, 1.0}) {
    const auto built = build_cvar_model(diagram, stats, alpha);
    const auto result = solve_model_with_backend(diagram, built, {support::highs_command()});
    REQUIRE(result.status == SolveStatus::optimal);
    const auto expected = oracle::best_cvar(brute, alpha);
    CHECK(support::close(result.objective, expected.value));
    CHECK(support::close(result.recomputed_objective, expected.value));
  }
  const auto eu = oracle::best_expected_utility(brute);
  const auto at_one = solve_model_with_backend(diagram, build_cvar_model(diagram, stats, 1.0), {support::highs_command()});
  CHECK(support::close(at_one.objective, eu.value));
}

TEST_CASE("chance constraints") {
  const auto def = support::oil(1, 12);
  const auto diagram = support::build(def);
  const auto stats = compute_path_statistics(diagram);
  const oracle::Brute brute(def);
  // Drill (D = yes, index 0) on a dry well (O = dry, index 0).
  ChanceConstraintSpec drill_dry{{"D", "O"}, {{0, 0}}, 0.0};

  SUBCASE("rows carry the event mass") {
    auto dp = build_dp_model(diagram);
    add_chance_constraint(diagram, dp, drill_dry);
    const auto& cc = row(dp.model, "cc[0]");
    CHECK(cc.sense == RowSense::le);
    CHECK(cc.rhs == 0.0);
    double mass = 0.0;
    for (const auto& t : cc.terms) mass += t.coef;
    double expected = 0.0;
    brute.for_each_path([&](const std::vector<int>& s, double p, double) {
      if (s[static_cast<std::size_t>(brute.slot("D"))] == 0 && s[static_cast<std::size_t>(brute.slot("O"))] == 0)
        expected += p;
    });
    CHECK(mass == doctest::Approx(expected).epsilon(1e-12));

    auto dpr = build_dpr_model(diagram, stats);
    add_chance_constraint(diagram, dpr, drill_dry);
    double dpr_mass = 0.0;
    for (const auto& t : row(dpr.model, "cc[0]").terms) dpr_mass += t.coef;
    CHECK(dpr_mass == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("b_T = 0 matches the restricted oracle; b_T = 1 recovers the unconstrained optimum") {
    const auto restricted = oracle::best_expected_utility_with_chance(brute, {"D", "O"}, {{0, 0}}, 0.0);
    const auto free = oracle::best_expected_utility(brute);
    DprOptions eq;
    eq.cuts_as_equalities = true;
    DprOptions filter;
    filter.filter_zero_segments = true;
    const std::vector<BuiltModel> variants{build_dp_model(diagram), build_dpr_model(diagram, stats),
                                           build_dpr_model(diagram, stats, eq),
                                           build_dpr_model(diagram, stats, filter)};
    for (std::size_t variant = 0; variant < variants.size(); ++variant) {
      auto built = variants[variant];
      auto loose = built;
      add_chance_constraint(diagram, built, drill_dry);
      CHECK((variant == 2) == (rows_with_prefix(built.model, "chance_mass") == 0));
      const auto r = solve_model_with_backend(diagram, built, {support::highs_command()});
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(support::close(r.objective, restricted.value));
      CHECK(brute.event_probability(r.strategy.rules, {"D", "O"}, {{0, 0}}) <= 1e-12);

      ChanceConstraintSpec slack = drill_dry;
      slack.threshold = 1.0;
      add_chance_constraint(diagram, loose, slack);
      const auto l = solve_model_with_backend(diagram, loose, {support::highs_command()});
      CHECK(support::close(l.objective, free.value));
    }
  }

  SUBCASE("empty event gives an empty row that changes nothing") {
    auto built = build_dpr_model(diagram, stats);
    add_chance_constraint(diagram, built, {{"D"}, {}, 0.0});
    CHECK(row(built.model, "cc[0]").terms.empty());
    const auto text = export_lp(built.model);
    const auto back = parse_lp(text);
    CHECK(row(back, "cc[0]").terms.empty());
    const auto r = solve_model_with_backend(diagram, built, {support::highs_command()});
    CHECK(support::close(r.objective, oracle::best_expected_utility(brute).value));
  }

  SUBCASE("malformed specs are rejected") {
    CHECK_THROWS_AS(check_chance_spec(diagram, {{"U"}, {{0}}, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(check_chance_spec(diagram, {{"nope"}, {{0}}, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(check_chance_spec(diagram, {{"D"}, {{5}}, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(check_chance_spec(diagram, {{"D"}, {{0}}, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(check_chance_spec(diagram, {{"D", "D"}, {{0, 0}}, 0.5}), std::invalid_argument);
  }

  SUBCASE("JSON specs accept labels or indices") {
    const auto spec = chance_spec_from_json(
        diagram, nlohmann::json::parse(R"({"nodes": ["D", "O"], "states": [["yes", "dry"], [1, 2]], "threshold": 0.1})"));
    CHECK(spec.states == std::vector<std::vector<int>>{{0, 0}, {1, 2}});
    CHECK(spec.threshold == 0.1);
    CHECK_THROWS_AS(chance_spec_from_json(diagram, nlohmann::json::parse(R"({"nodes": ["D"], "states": [["maybe"]]})")),
                    std::invalid_argument);
  }

  SUBCASE("ChanceEvent membership") {
    const ChanceEvent event(diagram, drill_dry);
    brute.for_each_path([&](const std::vector<int>& s, double, double) {
      const bool in = s[static_cast<std::size_t>(brute.slot("D"))] == 0 && s[static_cast<std::size_t>(brute.slot("O"))] == 0;
      CHECK(event.contains(s) == in);
    });
  }
}

TEST_CASE("variable map JSON round trip") {
  const auto diagram = support::build(support::water(2, 2));
  for (const auto& built : {build_dp_model(diagram), build_dpr_model(diagram), build_cvar_model(diagram, 0.5)}) {
    const nlohmann::json j = built.map;
    const auto back = j.get<VariableMap>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.z == built.map.z);
    CHECK(back.formulation == built.map.formulation);
  }
}

TEST_CASE("LP export of an empty model is the header and End") {
  const auto text = export_lp(MilpModel{});
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Bounds") == std::string::npos);
  CHECK(text.find("Binary") == std::string::npos);
  CHECK(text.size() >= 4);
  CHECK(text.substr(text.size() - 4) == "End\n");
  const auto back = parse_lp(text);
  CHECK(back.variables().empty());
  CHECK(back.constraints().empty());
}

TEST_CASE("LP round trip preserves every coefficient") {
  const auto diagram = support::build(support::oil(1, 9));
  std::vector<BuiltModel> models{build_dp_model(diagram), build_dpr_model(diagram), build_cvar_model(diagram, 0.3)};
  add_chance_constraint(diagram, models[1], {{"D", "O"}, {{0, 0}, {1, 2}}, 0.25});
  for (const auto& built : models) {
    const auto text = export_lp(built.model);
    const auto back = parse_lp(text);
    REQUIRE(back.variables().size() == built.model.variables().size());
    for (std::size_t j = 0; j < back.variables().size(); ++j) {
      const auto& a = built.model.variables()[j];
      const auto& b = back.variables()[j];
      CHECK(a.name == b.name);
      CHECK(a.lower == b.lower);
      CHECK(a.upper == b.upper);
      CHECK(a.type == b.type);
    }
    CHECK(back.objective() == built.model.objective());
    REQUIRE(back.constraints().size() == built.model.constraints().size());
    for (std::size_t r = 0; r < back.constraints().size(); ++r) {
      const auto& a = built.model.constraints()[r];
      const auto& b = back.constraints()[r];
      CHECK(a.name == b.name);
      CHECK(a.sense == b.sense);
      CHECK(a.rhs == b.rhs);
      CHECK(a.terms == b.terms);
    }
    CHECK(export_lp(back) == text);
  }
}

TEST_CASE("LP parser rejects unsupported input") {
  CHECK_THROWS(parse_lp("Minimize\n obj: x\nEnd\n"));
  CHECK_THROWS(parse_lp("Maximize\n obj: x\nGeneral\n x\nEnd\n"));
  CHECK_THROWS(parse_lp("Maximize\n obj: 2 x\nSubject To\n c1: x <=\nEnd\n"));
}

TEST_CASE("LP parser accepts common LP syntax variants") {
  const auto m = parse_lp(
      "\\ comment\nmaximize\n obj: 3 a + 2 b - c\nsubject to\n r1: a + b <= 4\n r2: - a + c >= -1\n"
      " r3: 2 a - b = 0\nbounds\n 0 <= a <= 10\n b <= 3\n c free\nbinaries\n d\nend\n");
  CHECK(m.variables().size() == 4);
  CHECK(m.constraints().size() == 3);
  CHECK(m.variables()[static_cast<std::size_t>(m.variable_index("b"))].upper == 3.0);
  CHECK(m.variables()[static_cast<std::size_t>(m.variable_index("c"))].lower == -kInfinity);
  CHECK(m.variables()[static_cast<std::size_t>(m.variable_index("d"))].type == VarType::binary);
}
