#pragma once

// Brute-force reference computations used as test oracles. Everything here
// works from the file-level DiagramDefinition with its own indexing code and
// none of the library's path, statistics or strategy machinery.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "idmilp/diagram.hpp"

namespace oracle {

using Rules = std::vector<std::vector<int>>;  // [decision ordinal][info] -> alternative
using Distribution = std::vector<std::pair<double, double>>;

class Brute {
 public:
  explicit Brute(const idmilp::DiagramDefinition& def);

  /// Chance and decision nodes in declaration order.
  const std::vector<std::string>& slots() const { return slot_names_; }
  int slot(const std::string& name) const;
  std::uint64_t path_count() const;

  /// fn(states per slot, p, U) over every path, last slot fastest.
  void for_each_path(const std::function<void(const std::vector<int>&, double, double)>& fn) const;

  /// Information-state index of a node under a full path.
  std::uint64_t info(const std::string& node, const std::vector<int>& path) const;
  std::uint64_t info_count(const std::string& node) const;

  const std::vector<std::string>& decisions() const { return decisions_; }
  bool compatible(const Rules& rules, const std::vector<int>& path) const;

  /// Every strategy, first decision's first info state outermost.
  void for_each_strategy(const std::function<void(const Rules&)>& fn) const;
  std::uint64_t strategy_count() const;

  double expected_utility(const Rules& rules) const;
  Distribution distribution(const Rules& rules) const;
  /// Probability of the paths whose states on `nodes` match one of `states`.
  double event_probability(const Rules& rules, const std::vector<std::string>& nodes,
                           const std::vector<std::vector<int>>& states) const;

  double min_utility() const;

 private:
  idmilp::DiagramDefinition def_;
  std::vector<std::string> slot_names_;
  std::vector<int> slot_states_;
  std::vector<std::string> decisions_;
  std::map<std::string, std::vector<int>> parent_slots_;  // node -> parent slots, declaration order
  std::map<std::string, std::vector<int>> parent_nodes_;  // node -> parent node indices

  struct Record {
    std::vector<int> path;
    double p = 0.0, u = 0.0;
    std::vector<std::uint64_t> decision_info;
    std::vector<int> decision_state;
  };
  std::vector<Record> records_;  // every path, built once
  bool compatible(const Rules& rules, const Record& r) const;
};

/// Worst-alpha-tail mean, filling from the lowest atom upward.
double cvar(Distribution dist, double alpha);

struct Optimum {
  double value = 0.0;
  Rules rules;
  std::uint64_t feasible = 0;
};

/// Best EU over all strategies, optionally only those with zero (≤ b)
/// probability on a chance event.
Optimum best_expected_utility(const Brute& brute);
Optimum best_cvar(const Brute& brute, double alpha);
Optimum best_expected_utility_with_chance(const Brute& brute, const std::vector<std::string>& nodes,
                                          const std::vector<std::vector<int>>& states, double threshold);

}  // namespace oracle
