#include "idmilp/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace idmilp {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::chance:
      return "chance";
    case NodeKind::decision:
      return "decision";
    case NodeKind::value:
      return "value";
  }
  return "chance";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "chance") return NodeKind::chance;
  if (text == "decision") return NodeKind::decision;
  if (text == "value") return NodeKind::value;
  throw std::invalid_argument("unknown node kind '" + std::string(text) + "'");
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& f : findings) out << f.node << ": " << f.category << ": " << f.message << '\n';
  return out.str();
}

DiagramError::DiagramError(ValidationReport report)
    : std::runtime_error("invalid influence diagram:\n" + report.to_string()), report_(std::move(report)) {}

namespace {

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

/// Name -> first declaration index.
std::map<std::string, int, std::less<>> index_names(const std::vector<Node>& nodes) {
  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].name, static_cast<int>(i));
  return index;
}

/// Kahn's algorithm over resolved arcs; always picks the smallest declared
/// index among ready nodes. Returns fewer than n nodes when a cycle exists.
std::vector<int> kahn_order(std::size_t n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (auto [p, c] : arcs) {
    children[static_cast<std::size_t>(p)].push_back(c);
    ++indegree[static_cast<std::size_t>(c)];
  }
  std::set<int> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.insert(static_cast<int>(i));
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int next = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(next);
    for (int c : children[static_cast<std::size_t>(next)])
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.insert(c);
  }
  return order;
}

}  // namespace

std::vector<std::string> topological_order(const DiagramDefinition& definition) {
  const auto index = index_names(definition.nodes);
  std::vector<std::pair<int, int>> arcs;
  for (const auto& arc : definition.arcs) {
    auto p = index.find(arc.parent);
    auto c = index.find(arc.child);
    if (p == index.end() || c == index.end())
      throw StructureError("arc " + arc.parent + " -> " + arc.child + " names an unknown node");
    arcs.emplace_back(p->second, c->second);
  }
  const auto order = kahn_order(definition.nodes.size(), arcs);
  if (order.size() != definition.nodes.size()) throw StructureError("diagram contains a cycle");
  std::vector<std::string> names;
  names.reserve(order.size());
  for (int i : order) names.push_back(definition.nodes[static_cast<std::size_t>(i)].name);
  return names;
}

ValidationReport validate_diagram(const DiagramDefinition& def) {
  ValidationReport report;
  auto add = [&](const std::string& node, std::string category, std::string message) {
    report.findings.push_back({node, std::move(category), std::move(message)});
  };

  const auto index = index_names(def.nodes);
  {
    std::set<std::string> seen;
    for (const auto& node : def.nodes) {
      if (node.name.empty()) add(node.name, "name", "node name is empty");
      if (!seen.insert(node.name).second) add(node.name, "duplicate-name", "node name declared twice");
      if (node.kind == NodeKind::value) {
        if (!node.states.empty()) add(node.name, "value-states", "value node must not declare states");
      } else if (node.states.empty()) {
        add(node.name, "empty-states", "chance and decision nodes need at least one state");
      }
    }
  }

  std::vector<std::pair<int, int>> arcs;
  {
    std::set<std::pair<int, int>> seen;
    for (const auto& arc : def.arcs) {
      auto p = index.find(arc.parent);
      auto c = index.find(arc.child);
      if (p == index.end()) add(arc.parent, "unknown-node", "arc " + arc.parent + " -> " + arc.child + " has unknown parent");
      if (c == index.end()) add(arc.child, "unknown-node", "arc " + arc.parent + " -> " + arc.child + " has unknown child");
      if (p == index.end() || c == index.end()) continue;
      if (!seen.insert({p->second, c->second}).second) {
        add(arc.child, "duplicate-arc", "arc " + arc.parent + " -> " + arc.child + " declared twice");
        continue;
      }
      if (def.nodes[static_cast<std::size_t>(p->second)].kind == NodeKind::value)
        add(arc.parent, "value-parent", "value node has outgoing arc to " + arc.child);
      arcs.emplace_back(p->second, c->second);
    }
  }

  const auto order = kahn_order(def.nodes.size(), arcs);
  if (order.size() != def.nodes.size()) {
    std::vector<bool> placed(def.nodes.size(), false);
    for (int i : order) placed[static_cast<std::size_t>(i)] = true;
    std::string members;
    for (std::size_t i = 0; i < def.nodes.size(); ++i)
      if (!placed[i]) members += (members.empty() ? "" : ", ") + def.nodes[i].name;
    for (std::size_t i = 0; i < def.nodes.size(); ++i)
      if (!placed[i]) add(def.nodes[i].name, "cycle", "node lies on or behind a directed cycle (" + members + ")");
  }

  // Tables are only checked once the parent structure is meaningful.
  if (!report.findings.empty()) return report;

  std::vector<std::vector<int>> parents(def.nodes.size());
  for (auto [p, c] : arcs) parents[static_cast<std::size_t>(c)].push_back(p);
  for (auto& list : parents) std::sort(list.begin(), list.end());

  auto info_count = [&](std::size_t node) -> long double {
    long double count = 1;
    for (int p : parents[node]) count *= static_cast<long double>(def.nodes[static_cast<std::size_t>(p)].states.size());
    return count;
  };

  for (const auto& [name, table] : def.cpts) {
    auto it = index.find(name);
    if (it == index.end()) add(name, "cpt-unexpected", "probability table for unknown node");
    else if (def.nodes[static_cast<std::size_t>(it->second)].kind != NodeKind::chance)
      add(name, "cpt-unexpected", "probability table given for a non-chance node");
  }
  for (const auto& [name, table] : def.utilities) {
    auto it = index.find(name);
    if (it == index.end()) add(name, "utility-unexpected", "utility table for unknown node");
    else if (def.nodes[static_cast<std::size_t>(it->second)].kind != NodeKind::value)
      add(name, "utility-unexpected", "utility table given for a non-value node");
  }

  for (std::size_t i = 0; i < def.nodes.size(); ++i) {
    const Node& node = def.nodes[i];
    const long double rows = info_count(i);
    if (rows > static_cast<long double>(std::numeric_limits<std::int32_t>::max())) {
      add(node.name, "table-size", "information state space too large for a dense table");
      continue;
    }
    const auto expected_rows = static_cast<std::size_t>(rows);
    if (node.kind == NodeKind::chance) {
      auto it = def.cpts.find(node.name);
      if (it == def.cpts.end()) {
        add(node.name, "cpt-missing", "chance node has no probability table");
        continue;
      }
      const auto& table = it->second;
      if (table.size() != expected_rows) {
        add(node.name, "cpt-shape",
            "expected " + std::to_string(expected_rows) + " rows, found " + std::to_string(table.size()));
        continue;
      }
      for (std::size_t r = 0; r < table.size(); ++r) {
        const auto& row = table[r];
        if (row.size() != node.states.size()) {
          add(node.name, "cpt-shape",
              "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries, expected " +
                  std::to_string(node.states.size()));
          continue;
        }
        bool entries_ok = true;
        for (double p : row) {
          if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            add(node.name, "cpt-entry", "row " + std::to_string(r) + " has entry " + format_number(p) + " outside [0, 1]");
            entries_ok = false;
            break;
          }
        }
        if (!entries_ok) continue;
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(sum - 1.0) > kProbabilityTolerance)
          add(node.name, "cpt-row-sum", "row " + std::to_string(r) + " sums to " + format_number(sum));
      }
    } else if (node.kind == NodeKind::value) {
      auto it = def.utilities.find(node.name);
      if (it == def.utilities.end()) {
        add(node.name, "utility-missing", "value node has no utility table");
        continue;
      }
      if (it->second.size() != expected_rows) {
        add(node.name, "utility-shape",
            "expected " + std::to_string(expected_rows) + " entries, found " + std::to_string(it->second.size()));
        continue;
      }
      for (std::size_t r = 0; r < it->second.size(); ++r)
        if (!std::isfinite(it->second[r]))
          add(node.name, "utility-nonfinite", "entry " + std::to_string(r) + " is not finite");
    }
  }

  report.warnings = def.notes;
  return report;
}

InfluenceDiagram InfluenceDiagram::build(const DiagramDefinition& def) {
  ValidationReport report = validate_diagram(def);
  if (!report.ok()) throw DiagramError(std::move(report));

  InfluenceDiagram d;
  d.nodes_ = def.nodes;
  d.arcs_ = def.arcs;
  d.notes_ = def.notes;
  d.index_ = index_names(def.nodes);
  const std::size_t n = def.nodes.size();

  d.slot_of_.assign(n, -1);
  d.decision_ordinal_.assign(n, -1);
  std::vector<int> slot_radices;
  for (std::size_t i = 0; i < n; ++i) {
    const int idx = static_cast<int>(i);
    switch (def.nodes[i].kind) {
      case NodeKind::chance:
        d.chance_.push_back(idx);
        break;
      case NodeKind::decision:
        d.decision_ordinal_[i] = static_cast<int>(d.decisions_.size());
        d.decisions_.push_back(idx);
        break;
      case NodeKind::value:
        d.values_.push_back(idx);
        break;
    }
    if (def.nodes[i].kind != NodeKind::value) {
      d.slot_of_[i] = static_cast<int>(d.slot_nodes_.size());
      d.slot_nodes_.push_back(idx);
      slot_radices.push_back(static_cast<int>(def.nodes[i].states.size()));
    }
  }
  d.path_radix_ = MixedRadix(std::move(slot_radices));

  std::vector<std::pair<int, int>> arcs;
  d.parents_.assign(n, {});
  for (const auto& arc : def.arcs) {
    const int p = d.index_.at(arc.parent);
    const int c = d.index_.at(arc.child);
    arcs.emplace_back(p, c);
    d.parents_[static_cast<std::size_t>(c)].push_back(p);
  }
  d.parent_slots_.assign(n, {});
  d.info_radix_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& ps = d.parents_[i];
    std::sort(ps.begin(), ps.end());
    std::vector<int> radices;
    for (int p : ps) {
      d.parent_slots_[i].push_back(d.slot_of_[static_cast<std::size_t>(p)]);
      radices.push_back(d.state_count(p));
    }
    d.info_radix_[i] = MixedRadix(std::move(radices));
  }

  d.topological_ = kahn_order(n, arcs);

  d.table_slot_.assign(n, -1);
  for (int c : d.chance_) {
    const auto& rows = def.cpts.at(d.nodes_[static_cast<std::size_t>(c)].name);
    ConditionalProbabilityTable t;
    t.owner = c;
    t.info_count = static_cast<int>(d.info_count(c));
    t.state_count = d.state_count(c);
    t.entries.reserve(static_cast<std::size_t>(t.info_count) * static_cast<std::size_t>(t.state_count));
    for (const auto& row : rows) {
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      for (double p : row) t.entries.push_back(sum == 1.0 ? p : p / sum);
    }
    d.table_slot_[static_cast<std::size_t>(c)] = static_cast<int>(d.cpts_.size());
    d.cpts_.push_back(std::move(t));
  }
  for (int v : d.values_) {
    UtilityTable t;
    t.owner = v;
    t.values = def.utilities.at(d.nodes_[static_cast<std::size_t>(v)].name);
    d.table_slot_[static_cast<std::size_t>(v)] = static_cast<int>(d.utilities_.size());
    d.utilities_.push_back(std::move(t));
  }

  std::vector<bool> observed(n, false);
  for (int dec : d.decisions_) {
    observed[static_cast<std::size_t>(dec)] = true;
    for (int p : d.parents_[static_cast<std::size_t>(dec)])
      if (d.kind(p) == NodeKind::chance) observed[static_cast<std::size_t>(p)] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (observed[i]) d.observation_.push_back(static_cast<int>(i));
  return d;
}

int InfluenceDiagram::node_index(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int InfluenceDiagram::require_node(std::string_view name) const {
  const int i = node_index(name);
  if (i < 0) throw std::invalid_argument("unknown node '" + std::string(name) + "'");
  return i;
}

std::uint64_t InfluenceDiagram::info_index(int index, std::span<const int> slot_states) const {
  const auto& slots = parent_slots_[static_cast<std::size_t>(index)];
  const auto& radix = info_radix_[static_cast<std::size_t>(index)];
  std::uint64_t result = 0;
  for (std::size_t k = 0; k < slots.size(); ++k)
    result += static_cast<std::uint64_t>(slot_states[static_cast<std::size_t>(slots[k])]) * radix.stride(k);
  return result;
}

const ConditionalProbabilityTable& InfluenceDiagram::cpt(int chance_node) const {
  if (kind(chance_node) != NodeKind::chance) throw std::invalid_argument(node(chance_node).name + " is not a chance node");
  return cpts_[static_cast<std::size_t>(table_slot_[static_cast<std::size_t>(chance_node)])];
}

const UtilityTable& InfluenceDiagram::utility_table(int value_node) const {
  if (kind(value_node) != NodeKind::value) throw std::invalid_argument(node(value_node).name + " is not a value node");
  return utilities_[static_cast<std::size_t>(table_slot_[static_cast<std::size_t>(value_node)])];
}

DiagramDefinition InfluenceDiagram::to_definition() const {
  DiagramDefinition def;
  def.nodes = nodes_;
  def.arcs = arcs_;
  def.notes = notes_;
  for (const auto& t : cpts_) {
    auto& rows = def.cpts[node(t.owner).name];
    for (int r = 0; r < t.info_count; ++r) {
      auto row = t.row(static_cast<std::uint64_t>(r));
      rows.emplace_back(row.begin(), row.end());
    }
  }
  for (const auto& t : utilities_) def.utilities[node(t.owner).name] = t.values;
  return def;
}

std::vector<std::string> observation_set(const InfluenceDiagram& diagram) {
  std::vector<std::string> names;
  for (int i : diagram.observation_set()) names.push_back(diagram.node(i).name);
  return names;
}

StrategyCountOverflow::StrategyCountOverflow(double log2_count)
    : std::overflow_error("strategy space exceeds representable count (log2 ~ " + format_number(log2_count) + ")"),
      log2_count_(log2_count) {}

double strategy_space_log2(const InfluenceDiagram& diagram) {
  double total = 0.0;
  for (int dnode : diagram.decision_nodes())
    total += static_cast<double>(diagram.info_count(dnode)) * std::log2(static_cast<double>(diagram.state_count(dnode)));
  return total;
}

std::uint64_t strategy_space_size(const InfluenceDiagram& diagram) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (int dnode : diagram.decision_nodes()) {
    const auto alternatives = static_cast<std::uint64_t>(diagram.state_count(dnode));
    for (std::uint64_t row = 0; row < diagram.info_count(dnode); ++row) {
      if (alternatives != 0 && total > kMax / alternatives) throw StrategyCountOverflow(strategy_space_log2(diagram));
      total *= alternatives;
      if (alternatives == 1) break;
    }
  }
  return total;
}

}  // namespace idmilp
