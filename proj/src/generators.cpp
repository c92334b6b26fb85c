#include "idmilp/generators.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "idmilp/mixed_radix.hpp"

namespace idmilp {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::oil:
      return "oil";
    case Family::turbine:
      return "turbine";
    case Family::water:
      return "water";
  }
  return "oil";
}

Family family_from_string(std::string_view text) {
  if (text == "oil") return Family::oil;
  if (text == "turbine") return Family::turbine;
  if (text == "water") return Family::water;
  throw std::invalid_argument("unknown family '" + std::string(text) + "'");
}

std::vector<std::vector<double>> random_cpt(std::size_t row_count, std::size_t state_count, Rng& rng) {
  if (row_count == 0 || state_count == 0) throw std::invalid_argument("random_cpt needs positive counts");
  std::vector<std::vector<double>> rows(row_count, std::vector<double>(state_count));
  for (auto& row : rows) {
    double sum = 0.0;
    while (sum == 0.0) {
      sum = 0.0;
      for (auto& v : row) sum += (v = rng.uniform());
    }
    for (auto& v : row) v /= sum;
  }
  return rows;
}

namespace {

std::vector<std::string> labels(int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

/// Parents of `node` in declaration order.
std::vector<int> sorted_parents(const DiagramDefinition& def, const std::string& node) {
  std::vector<int> parents;
  for (const auto& arc : def.arcs)
    if (arc.child == node)
      for (std::size_t i = 0; i < def.nodes.size(); ++i)
        if (def.nodes[i].name == arc.parent) parents.push_back(static_cast<int>(i));
  std::sort(parents.begin(), parents.end());
  return parents;
}

/// Calls fn(parent digits) for each information state of `node` in table order.
void for_each_info(const DiagramDefinition& def, const std::string& node,
                   const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> radices;
  for (int p : sorted_parents(def, node)) radices.push_back(static_cast<int>(def.nodes[static_cast<std::size_t>(p)].states.size()));
  const MixedRadix radix(radices);
  std::vector<int> digits(radices.size(), 0);
  do {
    fn(digits);
  } while (radix.increment(digits));
}

std::size_t info_rows(const DiagramDefinition& def, const std::string& node) {
  std::size_t rows = 1;
  for (int p : sorted_parents(def, node)) rows *= def.nodes[static_cast<std::size_t>(p)].states.size();
  return rows;
}

const Node& find(const DiagramDefinition& def, const std::string& name) {
  for (const auto& n : def.nodes)
    if (n.name == name) return n;
  throw std::invalid_argument("no node " + name);
}

void random_tables(DiagramDefinition& def, const std::vector<std::string>& chance, Rng& rng) {
  for (const auto& name : chance)
    def.cpts[name] = random_cpt(info_rows(def, name), find(def, name).states.size(), rng);
}

std::vector<double> sorted_draws(Rng& rng, int count, double lo, double hi) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(rng.uniform(lo, hi));
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

DiagramDefinition generate_oil(int tests, std::uint64_t seed) {
  if (tests < 1) throw std::invalid_argument("oil needs at least one test");
  Rng rng(seed);
  DiagramDefinition def;
  const std::vector<std::string> outcome{"dry", "medium", "wet"};
  def.nodes.push_back({"O", NodeKind::chance, outcome});
  def.nodes.push_back({"S", NodeKind::chance, outcome});
  for (int i = 1; i <= tests; ++i) def.nodes.push_back({"T" + std::to_string(i), NodeKind::decision, {"yes", "no"}});
  for (int i = 1; i <= tests; ++i)
    def.nodes.push_back({"R" + std::to_string(i), NodeKind::chance, {"N/A", "dry", "medium", "wet"}});
  def.nodes.push_back({"D", NodeKind::decision, {"yes", "no"}});
  for (int i = 1; i <= tests; ++i) def.nodes.push_back({"C" + std::to_string(i), NodeKind::value, {}});
  def.nodes.push_back({"U", NodeKind::value, {}});

  def.arcs.push_back({"O", "S"});
  for (int i = 1; i <= tests; ++i) {
    const auto t = "T" + std::to_string(i), r = "R" + std::to_string(i);
    def.arcs.push_back({"S", r});
    def.arcs.push_back({t, r});
    def.arcs.push_back({r, "D"});
    def.arcs.push_back({t, "C" + std::to_string(i)});
  }
  def.arcs.push_back({"D", "U"});
  def.arcs.push_back({"O", "U"});

  def.cpts["O"] = random_cpt(1, 3, rng);
  def.cpts["S"] = random_cpt(3, 3, rng);
  for (int i = 1; i <= tests; ++i) {
    // Parents (S, T_i): T_i = yes -> random over dry/medium/wet, no -> N/A.
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < 3; ++s) {
      auto tested = random_cpt(1, 3, rng).front();
      rows.push_back({0.0, tested[0], tested[1], tested[2]});
      rows.push_back({1.0, 0.0, 0.0, 0.0});
    }
    def.cpts["R" + std::to_string(i)] = rows;
  }

  std::vector<double> test_costs;
  for (int i = 0; i < tests; ++i) test_costs.push_back(rng.uniform(1.0, 50.0));
  const double drill_cost = rng.uniform(50.0, 90.0);
  const auto payoffs = sorted_draws(rng, 2, 100.0, 1000.0);
  const double payoff[3] = {0.0, payoffs[0], payoffs[1]};
  for (int i = 1; i <= tests; ++i) def.utilities["C" + std::to_string(i)] = {-test_costs[static_cast<std::size_t>(i - 1)], 0.0};
  // Parents (O, D), D = yes first.
  std::vector<double> u;
  for (int o = 0; o < 3; ++o) {
    u.push_back(payoff[o] - drill_cost);
    u.push_back(0.0);
  }
  def.utilities["U"] = u;
  return def;
}

DiagramDefinition turbine_skeleton(const std::vector<std::string>& chance_states) {
  DiagramDefinition def;
  auto chance = [&](const char* name) { def.nodes.push_back({name, NodeKind::chance, chance_states}); };
  chance("W");
  chance("FH");
  chance("SS");
  chance("TS");
  chance("SE");
  chance("TE");
  def.nodes.push_back({"IN", NodeKind::decision, {"none", "sensor check", "turbine inspection"}});
  chance("SR");
  chance("TR");
  def.nodes.push_back({"M", NodeKind::decision, {"none", "level 1", "level 2"}});
  chance("TF");
  def.nodes.push_back({"U", NodeKind::value, {}});
  const std::pair<const char*, const char*> arcs[] = {
      {"FH", "SS"}, {"FH", "IN"}, {"FH", "M"},  {"FH", "TS"}, {"W", "TS"},  {"W", "TF"},  {"SS", "SE"},
      {"TS", "TE"}, {"SE", "IN"}, {"TS", "SE"}, {"SE", "TE"}, {"SS", "SR"}, {"TS", "TR"}, {"TS", "TF"},
      {"TE", "IN"}, {"SE", "SR"}, {"TE", "TR"}, {"IN", "SR"}, {"IN", "TR"}, {"SR", "M"},  {"SR", "TR"},
      {"TR", "M"},  {"M", "TF"},  {"M", "U"},   {"IN", "U"},  {"TF", "U"}};
  for (const auto& [p, c] : arcs) def.arcs.push_back({p, c});
  return def;
}

DiagramDefinition generate_turbine(int states, std::uint64_t seed) {
  if (states < 2) throw std::invalid_argument("turbine needs at least two states");
  Rng rng(seed);
  auto def = turbine_skeleton(labels(states));
  random_tables(def, {"W", "FH", "SS", "TS", "SE", "TE", "SR", "TR", "TF"}, rng);
  const auto inspection = sorted_draws(rng, 2, 10.0, 100.0);
  const auto maintenance = sorted_draws(rng, 2, 500.0, 3000.0);
  const auto rewards = sorted_draws(rng, states, 100.0, 10000.0);
  const double icost[3] = {0.0, inspection[0], inspection[1]};
  const double mcost[3] = {0.0, maintenance[0], maintenance[1]};
  // Parents (IN, M, TF).
  std::vector<double> u;
  for_each_info(def, "U", [&](const std::vector<int>& s) {
    u.push_back(rewards[static_cast<std::size_t>(s[2])] - icost[s[0]] - mcost[s[1]]);
  });
  def.utilities["U"] = u;
  return def;
}

DiagramDefinition generate_water(int states, std::uint64_t seed) {
  if (states < 2) throw std::invalid_argument("water needs at least two states");
  Rng rng(seed);
  DiagramDefinition def;
  const auto k = labels(states);
  def.nodes.push_back({"A", NodeKind::chance, k});
  def.nodes.push_back({"W1", NodeKind::chance, k});
  def.nodes.push_back({"W2", NodeKind::chance, k});
  def.nodes.push_back({"F", NodeKind::chance, k});
  def.nodes.push_back({"M", NodeKind::decision, {"level 1", "level 2", "level 3"}});
  def.nodes.push_back({"D", NodeKind::decision, k});
  def.nodes.push_back({"C", NodeKind::chance, k});
  def.nodes.push_back({"V", NodeKind::value, {}});
  const std::pair<const char*, const char*> arcs[] = {{"F", "D"},  {"W1", "W2"}, {"D", "W2"}, {"A", "W2"},
                                                      {"A", "W1"}, {"W1", "F"},  {"M", "F"},  {"D", "C"},
                                                      {"M", "C"},  {"C", "V"},   {"M", "V"},  {"W2", "V"}};
  for (const auto& [p, c] : arcs) def.arcs.push_back({p, c});
  random_tables(def, {"A", "W1", "W2", "F", "C"}, rng);
  const auto monitoring = sorted_draws(rng, 3, 0.0, 100.0);
  const auto rewards = sorted_draws(rng, states, 0.0, 500.0);
  const auto dilution = sorted_draws(rng, states, 0.0, 100.0);
  // Parents (W2, M, C).
  std::vector<double> v;
  for_each_info(def, "V", [&](const std::vector<int>& s) {
    v.push_back(rewards[static_cast<std::size_t>(s[0])] - monitoring[static_cast<std::size_t>(s[1])] -
                dilution[static_cast<std::size_t>(s[2])]);
  });
  def.utilities["V"] = v;
  return def;
}

DiagramDefinition generate(const GeneratorConfig& config) {
  switch (config.family) {
    case Family::oil:
      return generate_oil(config.size, config.seed);
    case Family::turbine:
      return generate_turbine(config.size, config.seed);
    case Family::water:
      return generate_water(config.size, config.seed);
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace idmilp
