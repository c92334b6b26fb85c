#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "idmilp/mixed_radix.hpp"

namespace idmilp {

enum class NodeKind { chance, decision, value };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

struct Node {
  std::string name;
  NodeKind kind = NodeKind::chance;
  std::vector<std::string> states;  // empty exactly for value nodes
};

struct Arc {
  std::string parent;
  std::string child;
};

/// Unvalidated diagram as it appears in a file: structure plus numeric tables
/// keyed by node name. Tables use the mixed-radix information-state order
/// with parents sorted by declaration position, last parent fastest.
struct DiagramDefinition {
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  std::map<std::string, std::vector<std::vector<double>>> cpts;
  std::map<std::string, std::vector<double>> utilities;
  /// Free-form provenance remarks (e.g. discretization fallbacks). Surfaced
  /// as warnings by validation; never findings.
  std::vector<std::string> notes;
};

struct Finding {
  std::string node;
  std::string category;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  std::vector<std::string> warnings;

  bool ok() const { return findings.empty(); }
  std::string to_string() const;
};

inline constexpr double kProbabilityTolerance = 1e-9;

ValidationReport validate_diagram(const DiagramDefinition& definition);

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DiagramError : public std::runtime_error {
 public:
  explicit DiagramError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Kahn order with ties broken by declaration position. Throws StructureError
/// on unknown arc endpoints or a cycle.
std::vector<std::string> topological_order(const DiagramDefinition& definition);

struct ConditionalProbabilityTable {
  int owner = -1;
  int info_count = 1;
  int state_count = 0;
  std::vector<double> entries;  // row-major [info][state]

  double at(std::uint64_t info, int state) const {
    return entries[info * static_cast<std::uint64_t>(state_count) + static_cast<std::uint64_t>(state)];
  }
  std::span<const double> row(std::uint64_t info) const {
    return std::span<const double>(entries).subspan(info * static_cast<std::uint64_t>(state_count),
                                                    static_cast<std::size_t>(state_count));
  }
};

struct UtilityTable {
  int owner = -1;
  std::vector<double> values;  // one per information state
};

/// Validated, immutable influence diagram.
///
/// Chance and decision nodes are additionally numbered by "slot": their
/// position within C ∪ D in declaration order. Paths, segments and
/// information states are all expressed as slot-indexed state vectors, so a
/// path is simply one state index per slot.
class InfluenceDiagram {
 public:
  /// Validates, renormalizes near-unit CPT rows, and compiles index tables.
  /// Throws DiagramError carrying the findings when validation fails.
  static InfluenceDiagram build(const DiagramDefinition& definition);

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(int index) const { return nodes_[static_cast<std::size_t>(index)]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  int node_index(std::string_view name) const;  // -1 when absent
  int require_node(std::string_view name) const;
  NodeKind kind(int index) const { return node(index).kind; }
  int state_count(int index) const { return static_cast<int>(node(index).states.size()); }

  std::span<const int> parents(int index) const { return parents_[static_cast<std::size_t>(index)]; }
  std::span<const int> parent_slots(int index) const {
    return parent_slots_[static_cast<std::size_t>(index)];
  }
  const MixedRadix& info_radix(int index) const { return info_radix_[static_cast<std::size_t>(index)]; }
  std::uint64_t info_count(int index) const { return info_radix(index).size(); }
  /// Information-state index of `index` under the slot-indexed assignment.
  std::uint64_t info_index(int index, std::span<const int> slot_states) const;

  std::span<const int> chance_nodes() const { return chance_; }
  std::span<const int> decision_nodes() const { return decisions_; }
  std::span<const int> value_nodes() const { return values_; }
  /// Ordinal of a decision node within decision_nodes(), or -1.
  int decision_ordinal(int index) const { return decision_ordinal_[static_cast<std::size_t>(index)]; }

  std::size_t slot_count() const { return slot_nodes_.size(); }
  int slot_node(std::size_t slot) const { return slot_nodes_[slot]; }
  int slot_of(int index) const { return slot_of_[static_cast<std::size_t>(index)]; }
  const MixedRadix& path_radix() const { return path_radix_; }

  const ConditionalProbabilityTable& cpt(int chance_node) const;
  const UtilityTable& utility_table(int value_node) const;

  std::span<const int> topological_order() const { return topological_; }
  /// D ∪ C_I in declaration order.
  std::span<const int> observation_set() const { return observation_; }

  /// Reconstructs the file-level definition (used for serialization).
  DiagramDefinition to_definition() const;

  const std::vector<std::string>& notes() const { return notes_; }

 private:
  InfluenceDiagram() = default;

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::map<std::string, int, std::less<>> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> parent_slots_;
  std::vector<MixedRadix> info_radix_;
  std::vector<int> chance_, decisions_, values_;
  std::vector<int> decision_ordinal_;
  std::vector<int> slot_nodes_, slot_of_;
  MixedRadix path_radix_;
  std::vector<int> table_slot_;  // node -> index into cpts_ / utilities_
  std::vector<ConditionalProbabilityTable> cpts_;
  std::vector<UtilityTable> utilities_;
  std::vector<int> topological_;
  std::vector<int> observation_;
  std::vector<std::string> notes_;
};

/// Observation set O = D ∪ C_I as node names, declaration order.
std::vector<std::string> observation_set(const InfluenceDiagram& diagram);

class StrategyCountOverflow : public std::overflow_error {
 public:
  explicit StrategyCountOverflow(double log2_count);
  double log2_count() const { return log2_count_; }

 private:
  double log2_count_;
};

/// ∏_{d∈D} |S_d|^{|S_{I(d)}|}. Throws StrategyCountOverflow beyond 64 bits.
std::uint64_t strategy_space_size(const InfluenceDiagram& diagram);
double strategy_space_log2(const InfluenceDiagram& diagram);

}  // namespace idmilp
