#include "oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace oracle {

using idmilp::NodeKind;

Brute::Brute(const idmilp::DiagramDefinition& def) : def_(def) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < def.nodes.size(); ++i) index[def.nodes[i].name] = static_cast<int>(i);
  std::map<std::string, int> slot_of;
  for (const auto& n : def.nodes) {
    if (n.kind == NodeKind::value) continue;
    slot_of[n.name] = static_cast<int>(slot_names_.size());
    slot_names_.push_back(n.name);
    slot_states_.push_back(static_cast<int>(n.states.size()));
    if (n.kind == NodeKind::decision) decisions_.push_back(n.name);
  }
  for (const auto& n : def.nodes) {
    std::vector<int> parents;
    for (const auto& a : def.arcs)
      if (a.child == n.name) parents.push_back(index.at(a.parent));
    std::sort(parents.begin(), parents.end());
    parent_nodes_[n.name] = parents;
    auto& slots = parent_slots_[n.name];
    for (int p : parents) slots.push_back(slot_of.at(def.nodes[static_cast<std::size_t>(p)].name));
  }
  std::vector<int> path(slot_states_.size(), 0);
  const std::uint64_t total = path_count();
  for (std::uint64_t k = 0; k < total; ++k) {
    std::uint64_t rest = k;
    for (std::size_t s = slot_states_.size(); s-- > 0;) {
      path[s] = static_cast<int>(rest % static_cast<std::uint64_t>(slot_states_[s]));
      rest /= static_cast<std::uint64_t>(slot_states_[s]);
    }
    Record r;
    r.path = path;
    r.p = 1.0;
    for (const auto& n : def_.nodes) {
      if (n.kind == NodeKind::chance)
        r.p *= def_.cpts.at(n.name)[info(n.name, path)][static_cast<std::size_t>(path[static_cast<std::size_t>(slot_of.at(n.name))])];
      else if (n.kind == NodeKind::value)
        r.u += def_.utilities.at(n.name)[info(n.name, path)];
    }
    for (const auto& d : decisions_) {
      r.decision_info.push_back(info(d, path));
      r.decision_state.push_back(path[static_cast<std::size_t>(slot_of.at(d))]);
    }
    records_.push_back(std::move(r));
  }
}

bool Brute::compatible(const Rules& rules, const Record& r) const {
  for (std::size_t d = 0; d < rules.size(); ++d)
    if (rules[d][r.decision_info[d]] != r.decision_state[d]) return false;
  return true;
}

int Brute::slot(const std::string& name) const {
  const auto it = std::find(slot_names_.begin(), slot_names_.end(), name);
  if (it == slot_names_.end()) throw std::invalid_argument("no slot " + name);
  return static_cast<int>(it - slot_names_.begin());
}

std::uint64_t Brute::path_count() const {
  std::uint64_t n = 1;
  for (int s : slot_states_) n *= static_cast<std::uint64_t>(s);
  return n;
}

std::uint64_t Brute::info(const std::string& node, const std::vector<int>& path) const {
  std::uint64_t idx = 0;
  const auto& parents = parent_nodes_.at(node);
  const auto& slots = parent_slots_.at(node);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& parent = def_.nodes[static_cast<std::size_t>(parents[k])];
    idx = idx * parent.states.size() + static_cast<std::uint64_t>(path[static_cast<std::size_t>(slots[k])]);
  }
  return idx;
}

std::uint64_t Brute::info_count(const std::string& node) const {
  std::uint64_t n = 1;
  for (int p : parent_nodes_.at(node)) n *= def_.nodes[static_cast<std::size_t>(p)].states.size();
  return n;
}

void Brute::for_each_path(const std::function<void(const std::vector<int>&, double, double)>& fn) const {
  for (const auto& r : records_) fn(r.path, r.p, r.u);
}

bool Brute::compatible(const Rules& rules, const std::vector<int>& path) const {
  for (std::size_t d = 0; d < decisions_.size(); ++d)
    if (rules[d][info(decisions_[d], path)] != path[static_cast<std::size_t>(slot(decisions_[d]))]) return false;
  return true;
}

std::uint64_t Brute::strategy_count() const {
  std::uint64_t n = 1;
  for (const auto& d : decisions_) {
    const auto alts = static_cast<std::uint64_t>(slot_states_[static_cast<std::size_t>(slot(d))]);
    for (std::uint64_t i = 0; i < info_count(d); ++i) n *= alts;
  }
  return n;
}

void Brute::for_each_strategy(const std::function<void(const Rules&)>& fn) const {
  Rules rules;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<int> alts;
  for (std::size_t d = 0; d < decisions_.size(); ++d) {
    rules.emplace_back(info_count(decisions_[d]), 0);
    for (std::size_t i = 0; i < rules[d].size(); ++i) {
      cells.emplace_back(d, i);
      alts.push_back(slot_states_[static_cast<std::size_t>(slot(decisions_[d]))]);
    }
  }
  while (true) {
    fn(rules);
    std::size_t k = cells.size();
    while (k > 0) {
      --k;
      auto& v = rules[cells[k].first][cells[k].second];
      if (++v < alts[k]) break;
      v = 0;
      if (k == 0) return;
    }
    if (cells.empty()) return;
  }
}

double Brute::expected_utility(const Rules& rules) const {
  double eu = 0.0;
  for (const auto& r : records_)
    if (compatible(rules, r)) eu += r.p * r.u;
  return eu;
}

Distribution Brute::distribution(const Rules& rules) const {
  std::map<double, double> atoms;
  for (const auto& r : records_)
    if (r.p > 0.0 && compatible(rules, r)) atoms[r.u] += r.p;
  return {atoms.begin(), atoms.end()};
}

double Brute::event_probability(const Rules& rules, const std::vector<std::string>& nodes,
                                const std::vector<std::vector<int>>& states) const {
  double total = 0.0;
  for_each_path([&](const std::vector<int>& s, double p, double) {
    if (!compatible(rules, s)) return;
    for (const auto& joint : states) {
      bool match = true;
      for (std::size_t k = 0; k < nodes.size(); ++k)
        match = match && s[static_cast<std::size_t>(slot(nodes[k]))] == joint[k];
      if (match) {
        total += p;
        return;
      }
    }
  });
  return total;
}

double Brute::min_utility() const {
  double m = std::numeric_limits<double>::infinity();
  for_each_path([&](const std::vector<int>&, double, double u) { m = std::min(m, u); });
  return m;
}

double cvar(Distribution dist, double alpha) {
  std::sort(dist.begin(), dist.end());
  double need = alpha, acc = 0.0;
  for (const auto& [u, q] : dist) {
    const double take = std::min(q, need);
    acc += take * u;
    need -= take;
    if (need <= 0.0) break;
  }
  if (need > 1e-12) acc += need * dist.back().first;  // rounding leftover
  return acc / alpha;
}

namespace {

Optimum best_by(const Brute& brute, const std::function<bool(const Rules&, double&)>& score) {
  Optimum best;
  best.value = -std::numeric_limits<double>::infinity();
  brute.for_each_strategy([&](const Rules& rules) {
    double v = 0.0;
    if (!score(rules, v)) return;
    ++best.feasible;
    if (v > best.value) {
      best.value = v;
      best.rules = rules;
    }
  });
  return best;
}

}  // namespace

Optimum best_expected_utility(const Brute& brute) {
  return best_by(brute, [&](const Rules& r, double& v) {
    v = brute.expected_utility(r);
    return true;
  });
}

Optimum best_cvar(const Brute& brute, double alpha) {
  return best_by(brute, [&](const Rules& r, double& v) {
    v = cvar(brute.distribution(r), alpha);
    return true;
  });
}

Optimum best_expected_utility_with_chance(const Brute& brute, const std::vector<std::string>& nodes,
                                          const std::vector<std::vector<int>>& states, double threshold) {
  return best_by(brute, [&](const Rules& r, double& v) {
    if (brute.event_probability(r, nodes, states) > threshold + 1e-12) return false;
    v = brute.expected_utility(r);
    return true;
  });
}

}  // namespace oracle
