#include "idmilp/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace idmilp {

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::dp:
      return "dp";
    case Formulation::dpr:
      return "dpr";
    case Formulation::cvar:
      return "cvar";
  }
  return "dpr";
}

Formulation formulation_from_string(std::string_view text) {
  if (text == "dp") return Formulation::dp;
  if (text == "dpr") return Formulation::dpr;
  if (text == "cvar") return Formulation::cvar;
  throw std::invalid_argument("unknown formulation '" + std::string(text) + "'");
}

ModelTooLarge::ModelTooLarge(std::uint64_t count, std::uint64_t cap)
    : std::runtime_error("model too large: " + std::to_string(count) + " path variables exceed the cap of " +
                         std::to_string(cap)),
      count_(count) {}

void to_json(nlohmann::json& j, const VariableMap& map) {
  j = nlohmann::json{{"formulation", std::string(to_string(map.formulation))},
                     {"decisions", map.decisions},
                     {"z", map.z},
                     {"utility_shift", map.utility_shift},
                     {"cut_rows", map.cut_rows}};
  if (!map.x.empty()) {
    j["x"] = map.x;
    j["x_paths"] = map.x_paths;
  }
  if (!map.y.empty()) {
    j["y"] = map.y;
    j["y_segments"] = map.y_segments;
    j["observation_nodes"] = map.observation_nodes;
  }
  if (map.formulation == Formulation::cvar) {
    j["levels"] = map.levels;
    j["lam"] = map.lam;
    j["lambar"] = map.lambar;
    j["rho"] = map.rho;
    j["rhobar"] = map.rhobar;
    j["eta"] = map.eta;
    j["alpha"] = map.alpha;
    j["big_m"] = map.big_m;
    j["cvar_epsilon"] = map.cvar_epsilon;
  }
}

void from_json(const nlohmann::json& j, VariableMap& map) {
  map = VariableMap{};
  map.formulation = formulation_from_string(j.at("formulation").get<std::string>());
  j.at("decisions").get_to(map.decisions);
  j.at("z").get_to(map.z);
  j.at("utility_shift").get_to(map.utility_shift);
  if (j.contains("cut_rows")) j.at("cut_rows").get_to(map.cut_rows);
  if (j.contains("x")) {
    j.at("x").get_to(map.x);
    j.at("x_paths").get_to(map.x_paths);
  }
  if (j.contains("y")) {
    j.at("y").get_to(map.y);
    j.at("y_segments").get_to(map.y_segments);
    j.at("observation_nodes").get_to(map.observation_nodes);
  }
  if (map.formulation == Formulation::cvar) {
    j.at("levels").get_to(map.levels);
    j.at("lam").get_to(map.lam);
    j.at("lambar").get_to(map.lambar);
    j.at("rho").get_to(map.rho);
    j.at("rhobar").get_to(map.rhobar);
    j.at("eta").get_to(map.eta);
    j.at("alpha").get_to(map.alpha);
    j.at("big_m").get_to(map.big_m);
    j.at("cvar_epsilon").get_to(map.cvar_epsilon);
  }
}

namespace {

std::string indexed(std::string_view base, std::initializer_list<std::uint64_t> indices) {
  std::string name(base);
  for (auto i : indices) name += "[" + std::to_string(i) + "]";
  return name;
}

/// |E(s_d, s_I(d))| / ∏_{k∈D∖({d}∪I(d))} |S_k|, which equals ∏_{c∈C∖I(d)} |S_c|.
double structural_gamma(const InfluenceDiagram& diagram, int decision) {
  std::vector<bool> in_info(diagram.node_count(), false);
  for (int p : diagram.parents(decision)) in_info[static_cast<std::size_t>(p)] = true;
  double product = 1.0;
  for (int c : diagram.chance_nodes())
    if (!in_info[static_cast<std::size_t>(c)]) product *= diagram.state_count(c);
  return product;
}

/// Flat row numbering for (decision ordinal, info, alternative).
struct DecisionRows {
  std::vector<std::uint64_t> offset;  // per ordinal
  std::uint64_t total = 0;

  explicit DecisionRows(const InfluenceDiagram& diagram) {
    for (int d : diagram.decision_nodes()) {
      offset.push_back(total);
      total += diagram.info_count(d) * static_cast<std::uint64_t>(diagram.state_count(d));
    }
  }
  std::uint64_t row(const InfluenceDiagram& diagram, int ordinal, std::uint64_t info, int alt) const {
    const int d = diagram.decision_nodes()[static_cast<std::size_t>(ordinal)];
    return offset[static_cast<std::size_t>(ordinal)] + info * static_cast<std::uint64_t>(diagram.state_count(d)) +
           static_cast<std::uint64_t>(alt);
  }
};

/// Declares z and the one-hot rows; returns z variable indices [d][info][alt].
std::vector<std::vector<std::vector<int>>> add_strategy_block(const InfluenceDiagram& diagram, MilpModel& model,
                                                              VariableMap& map) {
  std::vector<std::vector<std::vector<int>>> z;
  const auto decisions = diagram.decision_nodes();
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const int d = decisions[k];
    const auto& node = diagram.node(d);
    map.decisions.push_back(node.name);
    auto& zd = z.emplace_back();
    auto& names = map.z.emplace_back();
    std::vector<int> digits(diagram.info_radix(d).digits(), 0);
    for (std::uint64_t info = 0; info < diagram.info_count(d); ++info) {
      diagram.info_radix(d).decode(info, digits);
      std::string context;
      const auto parents = diagram.parents(d);
      for (std::size_t p = 0; p < parents.size(); ++p) {
        const auto& parent = diagram.node(parents[p]);
        context += (p ? ", " : " | ") + parent.name + "=" + parent.states[static_cast<std::size_t>(digits[p])];
      }
      auto& zi = zd.emplace_back();
      auto& ni = names.emplace_back();
      for (int a = 0; a < diagram.state_count(d); ++a) {
        std::string name = indexed("z", {k, info, static_cast<std::uint64_t>(a)});
        zi.push_back(model.add_binary(name, "z(" + node.name + "=" + node.states[static_cast<std::size_t>(a)] +
                                                context + ")"));
        ni.push_back(std::move(name));
      }
    }
  }
  for (std::size_t k = 0; k < z.size(); ++k)
    for (std::size_t info = 0; info < z[k].size(); ++info) {
      std::vector<Term> terms;
      for (int v : z[k][info]) terms.push_back({v, 1.0});
      model.add_constraint(indexed("strategy", {k, info}), std::move(terms), RowSense::eq, 1.0);
    }
  return z;
}

/// Σ (linked columns) - Γ z ≤ 0 for every non-empty row.
void add_link_rows(const InfluenceDiagram& diagram, MilpModel& model, const DecisionRows& rows,
                   const std::vector<std::vector<std::vector<int>>>& z,
                   const std::vector<std::vector<int>>& linked, const std::vector<double>& gamma) {
  for (std::size_t k = 0; k < z.size(); ++k) {
    const int d = diagram.decision_nodes()[k];
    for (std::uint64_t info = 0; info < z[k].size(); ++info)
      for (int a = 0; a < diagram.state_count(d); ++a) {
        const auto r = rows.row(diagram, static_cast<int>(k), info, a);
        const auto& columns = linked[r];
        if (columns.empty()) continue;
        std::vector<Term> terms;
        terms.reserve(columns.size() + 1);
        for (int v : columns) terms.push_back({v, 1.0});
        terms.push_back({z[k][info][static_cast<std::size_t>(a)], -gamma[r]});
        model.add_constraint(indexed("link", {k, info, static_cast<std::uint64_t>(a)}), std::move(terms),
                             RowSense::le, 0.0);
      }
  }
}

/// Fills a slot-indexed path from observable-segment digits (other slots 0).
void place_segment(const PathStatistics& stats, std::span<const int> digits, Path& path) {
  for (std::size_t k = 0; k < digits.size(); ++k)
    path[static_cast<std::size_t>(stats.observation_slots[k])] = digits[k];
}

}  // namespace

double gamma_bound(const InfluenceDiagram& diagram, int decision_node, int alternative, std::uint64_t info) {
  if (diagram.kind(decision_node) != NodeKind::decision) throw std::invalid_argument("gamma_bound needs a decision node");
  std::vector<std::pair<int, int>> fixed{{decision_node, alternative}};
  std::vector<int> digits(diagram.info_radix(decision_node).digits(), 0);
  diagram.info_radix(decision_node).decode(info, digits);
  const auto parents = diagram.parents(decision_node);
  for (std::size_t p = 0; p < parents.size(); ++p) fixed.emplace_back(parents[p], digits[p]);
  const auto segment = make_segment(diagram, fixed);
  const double positive = static_cast<double>(extension(diagram, segment, ExtensionMode::positive).size());
  return std::min(positive, structural_gamma(diagram, decision_node));
}

BuiltModel build_dp_model(const InfluenceDiagram& diagram, const BuildOptions& options) {
  BuiltModel built;
  auto& model = built.model;
  auto& map = built.map;
  map.formulation = Formulation::dp;
  const auto z = add_strategy_block(diagram, model, map);
  const DecisionRows rows(diagram);
  std::vector<std::vector<int>> linked(rows.total);

  double min_utility = std::numeric_limits<double>::infinity();
  for (const auto& path : enumerate_paths(diagram)) min_utility = std::min(min_utility, path_utility(diagram, path));
  if (diagram.path_radix().size() == 0) min_utility = 0.0;
  map.utility_shift = options.utility_shift - min_utility;

  const auto decisions = diagram.decision_nodes();
  std::vector<Term> objective;
  std::uint64_t positive = 0;
  auto range = enumerate_paths(diagram);
  for (auto it = range.begin(); it != range.end(); ++it) {
    const auto& path = *it;
    const double p = path_probability(diagram, path);
    if (p <= 0.0) continue;
    if (++positive > options.max_path_variables) throw ModelTooLarge(positive, options.max_path_variables);
    const std::string name = indexed("x", {it.position()});
    const int var = model.add_variable(name, 0.0, 1.0, VarType::continuous);
    map.x.push_back(name);
    map.x_paths.push_back(it.position());
    const double coef = p * (path_utility(diagram, path) + map.utility_shift);
    if (coef != 0.0) objective.push_back({var, coef});
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const int d = decisions[k];
      linked[rows.row(diagram, static_cast<int>(k), diagram.info_index(d, path),
                      path[static_cast<std::size_t>(diagram.slot_of(d))])]
          .push_back(var);
    }
  }
  model.set_objective(std::move(objective));

  std::vector<double> gamma(rows.total);
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const double structural = structural_gamma(diagram, decisions[k]);
    const std::uint64_t end = k + 1 < decisions.size() ? rows.offset[k + 1] : rows.total;
    for (std::uint64_t r = rows.offset[k]; r < end; ++r)
      gamma[r] = std::min(static_cast<double>(linked[r].size()), structural);
  }
  add_link_rows(diagram, model, rows, z, linked, gamma);
  return built;
}

namespace {

/// Shared DPR skeleton: z block, y columns, link rows and cut rows. The
/// objective is left to the caller.
struct DprSkeleton {
  std::vector<int> y_var;  // per segment, -1 when filtered out
};

DprSkeleton add_dpr_skeleton(const InfluenceDiagram& diagram, const PathStatistics& stats, BuiltModel& built,
                             bool with_cuts, bool equality_cuts, bool filter_zero,
                             const std::vector<std::vector<std::vector<int>>>& z) {
  auto& model = built.model;
  auto& map = built.map;
  for (int n : stats.observation_nodes) map.observation_nodes.push_back(diagram.node(n).name);
  const DecisionRows rows(diagram);
  const auto decisions = diagram.decision_nodes();
  std::vector<std::vector<int>> linked(rows.total);
  std::vector<std::uint64_t> positive_paths(rows.total, 0);

  DprSkeleton skeleton;
  const std::uint64_t count = stats.segment_count();
  skeleton.y_var.assign(count, -1);
  Path path(diagram.slot_count(), 0);
  std::vector<int> digits(stats.observation_slots.size(), 0);
  for (std::uint64_t g = 0; g < count; ++g) {
    if (filter_zero && stats.segment_positive_paths[g] == 0) continue;
    stats.segment_radix.decode(g, digits);
    place_segment(stats, digits, path);
    std::string name = indexed("y", {g});
    std::string meaning = "y(";
    for (std::size_t k = 0; k < digits.size(); ++k) {
      const auto& node = diagram.node(stats.observation_nodes[k]);
      meaning += (k ? ", " : "") + node.name + "=" + node.states[static_cast<std::size_t>(digits[k])];
    }
    const int var = model.add_variable(name, 0.0, 1.0, VarType::continuous, meaning + ")");
    skeleton.y_var[g] = var;
    map.y.push_back(std::move(name));
    map.y_segments.push_back(g);
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const int d = decisions[k];
      const auto r = rows.row(diagram, static_cast<int>(k), diagram.info_index(d, path),
                              path[static_cast<std::size_t>(diagram.slot_of(d))]);
      linked[r].push_back(var);
      positive_paths[r] += stats.segment_positive_paths[g];
    }
  }

  // Equality cuts force y = 1 on compatible zero-probability segments, so the
  // |E^>| term of Γ is only valid with inequality cuts or none.
  std::vector<double> gamma(rows.total);
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const double structural = structural_gamma(diagram, decisions[k]);
    const std::uint64_t end = k + 1 < decisions.size() ? rows.offset[k + 1] : rows.total;
    for (std::uint64_t r = rows.offset[k]; r < end; ++r) {
      double g = std::min(structural, static_cast<double>(linked[r].size()));
      if (!equality_cuts) g = std::min(g, static_cast<double>(positive_paths[r]));
      gamma[r] = g;
    }
  }
  add_link_rows(diagram, model, rows, z, linked, gamma);

  if (with_cuts) {
    // Group segments by their C_I digits (non-decision positions of O).
    std::vector<int> chance_positions, chance_radices;
    for (std::size_t k = 0; k < stats.observation_nodes.size(); ++k)
      if (diagram.kind(stats.observation_nodes[k]) == NodeKind::chance) {
        chance_positions.push_back(static_cast<int>(k));
        chance_radices.push_back(diagram.state_count(stats.observation_nodes[k]));
      }
    const MixedRadix chance_radix(chance_radices);
    std::vector<std::vector<Term>> cuts(chance_radix.size());
    std::vector<int> chance_digits(chance_positions.size());
    for (std::uint64_t g = 0; g < count; ++g) {
      if (skeleton.y_var[g] < 0) continue;
      stats.segment_radix.decode(g, digits);
      for (std::size_t k = 0; k < chance_positions.size(); ++k)
        chance_digits[k] = digits[static_cast<std::size_t>(chance_positions[k])];
      cuts[chance_radix.index(chance_digits)].push_back({skeleton.y_var[g], 1.0});
    }
    for (std::uint64_t c = 0; c < cuts.size(); ++c) {
      if (cuts[c].empty()) continue;
      std::string name = indexed("cut", {c});
      model.add_constraint(name, std::move(cuts[c]), equality_cuts ? RowSense::eq : RowSense::le, 1.0);
      map.cut_rows.push_back(std::move(name));
    }
  }
  return skeleton;
}

}  // namespace

BuiltModel build_dpr_model(const InfluenceDiagram& diagram, const PathStatistics& stats, const DprOptions& dpr,
                           const BuildOptions& options) {
  if (dpr.cuts_as_equalities && dpr.filter_zero_segments)
    throw std::invalid_argument("equality cuts cannot be combined with zero-segment filtering");
  if (dpr.cuts_as_equalities && !dpr.with_cuts) throw std::invalid_argument("equality cuts require cuts");
  BuiltModel built;
  built.map.formulation = Formulation::dpr;
  built.map.utility_shift = options.utility_shift - stats.min_utility;
  const auto z = add_strategy_block(diagram, built.model, built.map);
  const auto skeleton =
      add_dpr_skeleton(diagram, stats, built, dpr.with_cuts, dpr.cuts_as_equalities, dpr.filter_zero_segments, z);
  std::vector<Term> objective;
  for (std::uint64_t g = 0; g < stats.segment_count(); ++g) {
    if (skeleton.y_var[g] < 0) continue;
    const double coef = stats.shifted_expected_utility(g, options.utility_shift);
    if (coef != 0.0) objective.push_back({skeleton.y_var[g], coef});
  }
  built.model.set_objective(std::move(objective));
  return built;
}

BuiltModel build_dpr_model(const InfluenceDiagram& diagram, const DprOptions& dpr, const BuildOptions& options) {
  return build_dpr_model(diagram, compute_path_statistics(diagram, options.statistics), dpr, options);
}

BuiltModel build_cvar_model(const InfluenceDiagram& diagram, const PathStatistics& stats, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("CVaR level alpha must lie in (0, 1]");
  BuiltModel built;
  auto& model = built.model;
  auto& map = built.map;
  map.formulation = Formulation::cvar;
  map.alpha = alpha;
  map.utility_shift = 0.0;
  const auto z = add_strategy_block(diagram, model, map);
  const auto skeleton = add_dpr_skeleton(diagram, stats, built, true, true, false, z);

  const auto& levels = stats.levels.levels;
  const double eps = stats.levels.epsilon;
  const double big_m = levels.empty() ? eps : levels.back() - levels.front() + eps;
  map.levels = levels;
  map.cvar_epsilon = eps;
  map.big_m = big_m;

  const std::size_t n = levels.size();
  std::vector<int> lam(n), lambar(n), rho(n), rhobar(n);
  for (std::size_t k = 0; k < n; ++k) {
    map.lam.push_back(indexed("lam", {k}));
    lam[k] = model.add_binary(map.lam.back());
  }
  for (std::size_t k = 0; k < n; ++k) {
    map.lambar.push_back(indexed("lambar", {k}));
    lambar[k] = model.add_binary(map.lambar.back());
  }
  for (std::size_t k = 0; k < n; ++k) {
    map.rho.push_back(indexed("rho", {k}));
    rho[k] = model.add_variable(map.rho.back(), 0.0, 1.0, VarType::continuous);
  }
  for (std::size_t k = 0; k < n; ++k) {
    map.rhobar.push_back(indexed("rhobar", {k}));
    rhobar[k] = model.add_variable(map.rhobar.back(), 0.0, 1.0, VarType::continuous);
  }
  map.eta = "eta";
  const int eta = model.add_variable("eta", -kInfinity, kInfinity, VarType::continuous, "value-at-risk threshold");

  // q(u) = Σ_{s_O} mass(s_O, u) y(s_O), gathered per level.
  std::vector<std::vector<Term>> q(n);
  for (std::uint64_t g = 0; g < stats.segment_count(); ++g)
    for (const auto& [level, mass] : stats.segment_level_mass[g])
      if (mass != 0.0) q[static_cast<std::size_t>(level)].push_back({skeleton.y_var[g], mass});

  for (std::size_t k = 0; k < n; ++k) {
    const double u = levels[k];
    model.add_constraint(indexed("eta_lam_up", {k}), {{eta, 1.0}, {lam[k], -big_m}}, RowSense::le, u);
    model.add_constraint(indexed("eta_lam_lo", {k}), {{eta, 1.0}, {lam[k], -(big_m + eps)}}, RowSense::ge, u - big_m);
    model.add_constraint(indexed("eta_lambar_up", {k}), {{eta, 1.0}, {lambar[k], -(big_m + eps)}}, RowSense::le,
                         u - eps);
    model.add_constraint(indexed("eta_lambar_lo", {k}), {{eta, 1.0}, {lambar[k], -big_m}}, RowSense::ge, u - big_m);
    model.add_constraint(indexed("rhobar_lambar", {k}), {{rhobar[k], 1.0}, {lambar[k], -1.0}}, RowSense::le, 0.0);
    std::vector<Term> rho_q = q[k];
    rho_q.push_back({lam[k], 1.0});
    rho_q.push_back({rho[k], -1.0});
    model.add_constraint(indexed("rho_q", {k}), std::move(rho_q), RowSense::le, 1.0);
    model.add_constraint(indexed("rho_lam", {k}), {{rho[k], 1.0}, {lam[k], -1.0}}, RowSense::le, 0.0);
    model.add_constraint(indexed("rho_rhobar", {k}), {{rho[k], 1.0}, {rhobar[k], -1.0}}, RowSense::le, 0.0);
    std::vector<Term> rhobar_q{{rhobar[k], 1.0}};
    for (const auto& t : q[k]) rhobar_q.push_back({t.var, -t.coef});
    model.add_constraint(indexed("rhobar_q", {k}), std::move(rhobar_q), RowSense::le, 0.0);
  }
  std::vector<Term> total;
  for (std::size_t k = 0; k < n; ++k) total.push_back({rhobar[k], 1.0});
  model.add_constraint("alpha_mass", std::move(total), RowSense::eq, alpha);

  std::vector<Term> objective;
  for (std::size_t k = 0; k < n; ++k)
    if (levels[k] != 0.0) objective.push_back({rhobar[k], levels[k] / alpha});
  model.set_objective(std::move(objective));
  return built;
}

BuiltModel build_cvar_model(const InfluenceDiagram& diagram, double alpha, const BuildOptions& options) {
  return build_cvar_model(diagram, compute_path_statistics(diagram, options.statistics), alpha);
}

ChanceConstraintSpec chance_spec_from_json(const InfluenceDiagram& diagram, const nlohmann::json& doc) {
  ChanceConstraintSpec spec;
  try {
    doc.at("nodes").get_to(spec.nodes);
    spec.threshold = doc.value("threshold", 1.0);
    for (const auto& joint : doc.at("states")) {
      if (!joint.is_array() || joint.size() != spec.nodes.size())
        throw std::invalid_argument("chance constraint joint state has wrong arity");
      std::vector<int> states;
      for (std::size_t k = 0; k < joint.size(); ++k) {
        if (joint[k].is_number_integer()) {
          states.push_back(joint[k].get<int>());
          continue;
        }
        const int n = diagram.node_index(spec.nodes[k]);
        if (n < 0) throw std::invalid_argument("unknown node '" + spec.nodes[k] + "' in chance constraint");
        const auto& labels = diagram.node(n).states;
        const auto label = joint[k].get<std::string>();
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end())
          throw std::invalid_argument("unknown state '" + label + "' of '" + spec.nodes[k] + "'");
        states.push_back(static_cast<int>(it - labels.begin()));
      }
      spec.states.push_back(std::move(states));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed chance constraint: ") + e.what());
  }
  check_chance_spec(diagram, spec);
  return spec;
}

void check_chance_spec(const InfluenceDiagram& diagram, const ChanceConstraintSpec& spec) {
  if (spec.nodes.empty()) throw std::invalid_argument("chance constraint needs at least one node");
  if (!(spec.threshold >= 0.0 && spec.threshold <= 1.0))
    throw std::invalid_argument("chance constraint threshold must lie in [0, 1]");
  std::set<int> seen;
  std::vector<int> sizes;
  for (const auto& name : spec.nodes) {
    const int n = diagram.node_index(name);
    if (n < 0) throw std::invalid_argument("unknown node '" + name + "' in chance constraint");
    if (diagram.kind(n) == NodeKind::value)
      throw std::invalid_argument("chance constraint cannot use value node '" + name + "'");
    if (!seen.insert(n).second) throw std::invalid_argument("chance constraint lists '" + name + "' twice");
    sizes.push_back(diagram.state_count(n));
  }
  for (const auto& joint : spec.states) {
    if (joint.size() != sizes.size()) throw std::invalid_argument("chance constraint joint state has wrong arity");
    for (std::size_t k = 0; k < joint.size(); ++k)
      if (joint[k] < 0 || joint[k] >= sizes[k])
        throw std::invalid_argument("chance constraint state out of range for '" + spec.nodes[k] + "'");
  }
}

ChanceEvent::ChanceEvent(const InfluenceDiagram& diagram, const ChanceConstraintSpec& spec) {
  check_chance_spec(diagram, spec);
  for (const auto& name : spec.nodes) slots_.push_back(diagram.slot_of(diagram.require_node(name)));
  states_ = spec.states;
}

bool ChanceEvent::contains(std::span<const int> path) const {
  for (const auto& joint : states_) {
    bool match = true;
    for (std::size_t k = 0; k < slots_.size() && match; ++k)
      match = path[static_cast<std::size_t>(slots_[k])] == joint[k];
    if (match) return true;
  }
  return false;
}

void add_chance_constraint(const InfluenceDiagram& diagram, BuiltModel& built, const ChanceConstraintSpec& spec) {
  const ChanceEvent event(diagram, spec);
  auto& model = built.model;
  const auto& map = built.map;
  std::vector<Term> terms, mass;
  Path path(diagram.slot_count(), 0);
  if (map.formulation == Formulation::dp) {
    for (std::size_t i = 0; i < map.x.size(); ++i) {
      diagram.path_radix().decode(map.x_paths[i], path);
      const int var = model.variable_index(map.x[i]);
      const double p = path_probability(diagram, path);
      mass.push_back({var, p});
      if (event.contains(path)) terms.push_back({var, p});
    }
  } else {
    const auto observed = diagram.observation_set();
    const MixedRadix segment_radix = observable_radix(diagram);
    std::vector<int> digits(observed.size());
    for (std::size_t i = 0; i < map.y.size(); ++i) {
      segment_radix.decode(map.y_segments[i], digits);
      const auto segment = observable_segment(diagram, digits);
      const int var = model.variable_index(map.y[i]);
      double weight = 0.0, total = 0.0;
      for (const auto& p : extension(diagram, segment, ExtensionMode::positive)) {
        const double q = path_probability(diagram, p);
        total += q;
        if (event.contains(p)) weight += q;
      }
      if (total != 0.0) mass.push_back({var, total});
      if (weight != 0.0) terms.push_back({var, weight});
    }
  }
  // Link rows only bound x / y from above, so without a lower bound a
  // constrained model can switch off event columns of a strategy that still
  // reaches them. Compatible columns carry probability one in total.
  bool forced = map.formulation == Formulation::cvar;
  for (const auto& c : model.constraints()) {
    if (c.name == "chance_mass") forced = true;
    for (const auto& cut : map.cut_rows)
      if (c.name == cut && c.sense == RowSense::eq) forced = true;
  }
  if (!forced) model.add_constraint("chance_mass", std::move(mass), RowSense::eq, 1.0);
  std::size_t k = 0;
  for (const auto& c : model.constraints())
    if (c.name.rfind("cc[", 0) == 0) ++k;
  model.add_constraint(indexed("cc", {k}), std::move(terms), RowSense::le, spec.threshold);
}

}  // namespace idmilp
