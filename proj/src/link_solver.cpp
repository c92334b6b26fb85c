#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "idmilp/solve.hpp"

namespace idmilp {

namespace {

using Clock = std::chrono::steady_clock;

struct LinkRef {
  int block;
  int alt;
};

/// Depth-first search over one-hot blocks with an incrementally maintained
/// bound:
///   Σ w over live columns with every block fixed
/// + Σ w over live columns with two or more open blocks
/// + Σ_{open blocks} max_a Σ w over live columns whose only open block it is,
/// where w = max(c, 0)·ub. A column linked to (block, a) is forced to zero
/// unless that block selects a, so columns with a single open block only
/// ever count under one alternative.
class LinkSearch {
 public:
  LinkSearch(const MilpModel& model, const LinkSolverOptions& options) : model_(model), options_(options) {
    classify_rows();
    classify_columns();
  }

  BackendSolution run() {
    start_ = Clock::now();
    for (std::size_t col = 0; col < weight_.size(); ++col) add(col);
    descend(0);
    BackendSolution solution;
    if (best_.empty()) {
      solution.status = stopped_ ? SolveStatus::timeout : SolveStatus::infeasible;
      return solution;
    }
    solution.status = stopped_ ? SolveStatus::feasible : SolveStatus::optimal;
    solution.objective = best_value_;
    const auto& vars = model_.variables();
    for (std::size_t v = 0; v < vars.size(); ++v) solution.values[vars[v].name] = best_[v];
    return solution;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void unsupported(const std::string& why) const {
    throw std::invalid_argument("model structure not supported by the link solver: " + why);
  }

  void classify_rows() {
    const auto& vars = model_.variables();
    block_of_.assign(vars.size(), -1);
    alt_of_.assign(vars.size(), -1);
    for (const auto& row : model_.constraints()) {
      const bool one_hot = row.sense == RowSense::eq && row.rhs == 1.0 && !row.terms.empty() &&
                           std::all_of(row.terms.begin(), row.terms.end(), [&](const Term& t) {
                             return t.coef == 1.0 && vars[static_cast<std::size_t>(t.var)].type == VarType::binary;
                           });
      if (!one_hot) continue;
      const int block = static_cast<int>(blocks_.size());
      auto& members = blocks_.emplace_back();
      for (const auto& t : row.terms) {
        auto& owner = block_of_[static_cast<std::size_t>(t.var)];
        if (owner >= 0) unsupported("binary " + vars[static_cast<std::size_t>(t.var)].name + " in two one-hot rows");
        owner = block;
        alt_of_[static_cast<std::size_t>(t.var)] = static_cast<int>(members.size());
        members.push_back(t.var);
      }
    }
    for (std::size_t v = 0; v < vars.size(); ++v)
      if (vars[v].type == VarType::binary && block_of_[v] < 0)
        unsupported("binary " + vars[v].name + " outside every one-hot row");

    links_.assign(vars.size(), {});
    for (std::size_t r = 0; r < model_.constraints().size(); ++r) {
      const auto& row = model_.constraints()[r];
      int binary = -1;
      bool link = row.sense == RowSense::le && row.rhs == 0.0;
      for (const auto& t : row.terms) {
        if (!link) break;
        if (vars[static_cast<std::size_t>(t.var)].type == VarType::binary) {
          link = binary < 0 && t.coef < 0.0;
          binary = t.var;
        } else {
          link = t.coef > 0.0;
        }
      }
      if (!link || binary < 0) {
        if (!is_one_hot(row)) side_rows_.push_back(r);
        continue;
      }
      const LinkRef ref{block_of_[static_cast<std::size_t>(binary)], alt_of_[static_cast<std::size_t>(binary)]};
      for (const auto& t : row.terms)
        if (t.var != binary) links_[static_cast<std::size_t>(t.var)].push_back(ref);
      side_rows_.push_back(r);  // the Γ side of a link row is re-checked at the leaf
    }
  }

  bool is_one_hot(const Constraint& row) const {
    return row.sense == RowSense::eq && row.rhs == 1.0 && !row.terms.empty() &&
           block_of_[static_cast<std::size_t>(row.terms.front().var)] >= 0 && row.terms.front().coef == 1.0 &&
           std::all_of(row.terms.begin(), row.terms.end(), [&](const Term& t) {
             return t.coef == 1.0 && block_of_[static_cast<std::size_t>(t.var)] >= 0;
           });
  }

  void classify_columns() {
    const auto& vars = model_.variables();
    std::vector<double> c(vars.size(), 0.0);
    for (const auto& t : model_.objective()) c[static_cast<std::size_t>(t.var)] += t.coef;
    objective_ = c;
    weight_.assign(vars.size(), 0.0);
    open_.assign(vars.size(), 0);
    dead_.assign(vars.size(), 0);
    members_.assign(blocks_.size(), {});
    for (std::size_t b = 0; b < blocks_.size(); ++b) members_[b].assign(blocks_[b].size(), {});
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (vars[v].type == VarType::binary) {
        if (c[v] != 0.0) unsupported("objective coefficient on binary " + vars[v].name);
        continue;
      }
      if (vars[v].lower != 0.0 || !std::isfinite(vars[v].upper))
        unsupported("continuous " + vars[v].name + " is not bounded in [0, u]");
      auto& refs = links_[v];
      std::sort(refs.begin(), refs.end(), [](const LinkRef& a, const LinkRef& b) {
        return std::tie(a.block, a.alt) < std::tie(b.block, b.alt);
      });
      refs.erase(std::unique(refs.begin(), refs.end(),
                             [](const LinkRef& a, const LinkRef& b) { return a.block == b.block && a.alt == b.alt; }),
                 refs.end());
      for (std::size_t k = 1; k < refs.size(); ++k)
        if (refs[k].block == refs[k - 1].block) unsupported("column " + vars[v].name + " linked twice to one row");
      for (const auto& ref : refs)
        members_[static_cast<std::size_t>(ref.block)][static_cast<std::size_t>(ref.alt)].push_back(static_cast<int>(v));
      open_[v] = static_cast<int>(refs.size());
      weight_[v] = std::max(c[v], 0.0) * vars[v].upper;
    }
    chosen_.assign(blocks_.size(), -1);
    single_.assign(blocks_.size(), {});
    for (std::size_t b = 0; b < blocks_.size(); ++b) single_[b].assign(blocks_[b].size(), 0.0L);
  }

  /// The open block of a column with exactly one, as (block, alt).
  LinkRef sole_open(std::size_t col) const {
    for (const auto& ref : links_[col])
      if (chosen_[static_cast<std::size_t>(ref.block)] < 0) return ref;
    return {-1, -1};
  }

  void account(std::size_t col, long double sign) {
    if (dead_[col] > 0 || weight_[col] == 0.0) return;
    const long double w = sign * weight_[col];
    if (open_[col] == 0) {
      settled_ += w;
    } else if (open_[col] == 1) {
      const auto ref = sole_open(col);
      single_[static_cast<std::size_t>(ref.block)][static_cast<std::size_t>(ref.alt)] += w;
    } else {
      shared_ += w;
    }
  }
  void add(std::size_t col) { account(col, 1.0L); }
  void remove(std::size_t col) { account(col, -1.0L); }

  void fix(std::size_t block, int alt) {
    for (const auto& cols : members_[block])
      for (int col : cols) remove(static_cast<std::size_t>(col));
    chosen_[block] = alt;
    for (std::size_t a = 0; a < members_[block].size(); ++a)
      for (int col : members_[block][a]) {
        --open_[static_cast<std::size_t>(col)];
        if (static_cast<int>(a) != alt) ++dead_[static_cast<std::size_t>(col)];
        add(static_cast<std::size_t>(col));
      }
  }

  void unfix(std::size_t block) {
    for (const auto& cols : members_[block])
      for (int col : cols) remove(static_cast<std::size_t>(col));
    const int alt = chosen_[block];
    chosen_[block] = -1;
    for (std::size_t a = 0; a < members_[block].size(); ++a)
      for (int col : members_[block][a]) {
        ++open_[static_cast<std::size_t>(col)];
        if (static_cast<int>(a) != alt) --dead_[static_cast<std::size_t>(col)];
        add(static_cast<std::size_t>(col));
      }
  }

  long double bound(std::size_t from) const {
    long double b = settled_ + shared_;
    for (std::size_t k = from; k < blocks_.size(); ++k)
      b += *std::max_element(single_[k].begin(), single_[k].end());
    return b;
  }

  bool time_up() {
    if (options_.time_limit < 0.0 || (nodes_ & 1023) != 0) return false;
    return std::chrono::duration<double>(Clock::now() - start_).count() >= options_.time_limit;
  }

  /// Bounds below the incumbent plus this slack cannot improve it; the slack
  /// absorbs rounding in the incrementally updated sums.
  double slack() const { return 1e-10 * std::max(1.0, std::abs(best_value_)); }

  void descend(std::size_t k) {
    ++nodes_;
    if (stopped_ || (options_.time_limit == 0.0) || time_up()) {
      stopped_ = true;
      return;
    }
    if (k == blocks_.size()) {
      leaf();
      return;
    }
    std::vector<int> order(blocks_[k].size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return single_[k][static_cast<std::size_t>(a)] > single_[k][static_cast<std::size_t>(b)];
    });
    for (int alt : order) {
      fix(k, alt);
      if (best_.empty() || bound(k + 1) > best_value_ + slack()) descend(k + 1);
      unfix(k);
      if (stopped_) return;
    }
  }

  void leaf() {
    const auto& vars = model_.variables();
    std::vector<double> x(vars.size(), 0.0);
    double value = 0.0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (vars[v].type == VarType::binary) {
        x[v] = chosen_[static_cast<std::size_t>(block_of_[v])] == alt_of_[v] ? 1.0 : 0.0;
      } else if (dead_[v] == 0 && objective_[v] >= 0.0) {
        x[v] = vars[v].upper;
        value += objective_[v] * x[v];
      }
    }
    if (!best_.empty() && value <= best_value_) return;
    // The box maximum bounds this leaf's LP; it is the LP optimum only if it
    // is feasible.
    for (std::size_t r : side_rows_) {
      const auto& row = model_.constraints()[r];
      double lhs = 0.0;
      for (const auto& t : row.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
      const double tol = 1e-9 * std::max(1.0, std::abs(row.rhs));
      const bool ok = row.sense == RowSense::le   ? lhs <= row.rhs + tol
                      : row.sense == RowSense::ge ? lhs >= row.rhs - tol
                                                  : std::abs(lhs - row.rhs) <= tol;
      if (!ok) unsupported("row " + row.name + " binds at a leaf");
    }
    best_ = std::move(x);
    best_value_ = value;
  }

  const MilpModel& model_;
  LinkSolverOptions options_;
  Clock::time_point start_;

  std::vector<std::vector<int>> blocks_;  // one-hot rows: binaries by alternative
  std::vector<int> block_of_, alt_of_;
  std::vector<std::vector<LinkRef>> links_;
  std::vector<std::size_t> side_rows_;
  std::vector<double> objective_, weight_;
  std::vector<std::vector<std::vector<int>>> members_;  // [block][alt] -> linked columns

  std::vector<int> chosen_, open_, dead_;
  std::vector<std::vector<long double>> single_;
  long double settled_ = 0.0L, shared_ = 0.0L;

  std::vector<double> best_;
  double best_value_ = 0.0;
  bool stopped_ = false;
  std::uint64_t nodes_ = 0;
};

}  // namespace

BackendSolution solve_link_structured(const MilpModel& model, const LinkSolverOptions& options) {
  LinkSearch search(model, options);
  return search.run();
}

}  // namespace idmilp
