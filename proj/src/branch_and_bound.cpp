#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <optional>

#include "idmilp/solve.hpp"

namespace idmilp {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> segment_values(const PathStatistics& stats) { return stats.segment_expected_utility; }

}  // namespace

StrategyBound::StrategyBound(const InfluenceDiagram& diagram, const PathStatistics& stats)
    : rows_(diagram), segments_(diagram, stats, rows_), value_(segment_values(stats)) {}

double StrategyBound::operator()(const DecisionStrategy& partial) const {
  std::vector<double> best(segments_.group_count, -std::numeric_limits<double>::infinity());
  for (std::size_t g = 0; g < value_.size(); ++g) {
    bool consistent = true;
    for (const auto& [r, alt] : segments_.requirements[g]) {
      const int rule = partial.rules[static_cast<std::size_t>(rows_.ordinal[r])][rows_.info[r]];
      if (rule >= 0 && rule != alt) {
        consistent = false;
        break;
      }
    }
    if (consistent) best[segments_.group[g]] = std::max(best[segments_.group[g]], value_[g]);
  }
  double total = 0.0;
  for (double b : best)
    if (b != -std::numeric_limits<double>::infinity()) total += b;
  return total;
}

namespace {

/// Depth-first search keeping, per C_I group, the best value among the
/// segments that every fixed row still allows.
class BranchAndBound {
 public:
  BranchAndBound(const InfluenceDiagram& diagram, const PathStatistics& stats, const BranchAndBoundOptions& options)
      : rows_(diagram), segments_(diagram, stats, rows_), options_(options), rule_(rows_.size(), -1) {
    value_ = stats.segment_expected_utility;
    violated_.assign(value_.size(), 0);
    members_.resize(segments_.group_count);
    for (std::size_t g = 0; g < value_.size(); ++g) members_[segments_.group[g]].push_back(g);
    by_row_alt_.resize(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) by_row_alt_[r].resize(static_cast<std::size_t>(rows_.alternatives[r]));
    for (std::size_t g = 0; g < value_.size(); ++g)
      for (const auto& [r, alt] : segments_.requirements[g]) by_row_alt_[r][static_cast<std::size_t>(alt)].push_back(g);
    group_best_.resize(segments_.group_count);
    for (std::size_t c = 0; c < members_.size(); ++c) group_best_[c] = recompute_group(c);
    if (options.time_limit >= 0.0)
      deadline_ = Clock::now() +
                  std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.time_limit));
  }

  void run(SearchStats& search) {
    search_ = &search;
    descend(0, current_bound());
  }

  bool found() const { return found_; }
  bool interrupted() const { return interrupted_; }
  const std::vector<int>& best_rule() const { return best_rule_; }

 private:
  double recompute_group(std::size_t c) const {
    double best = -std::numeric_limits<double>::infinity();
    for (auto g : members_[c])
      if (violated_[g] == 0) best = std::max(best, value_[g]);
    return best;
  }

  double current_bound() const {
    double total = 0.0;
    for (double b : group_best_)
      if (b != -std::numeric_limits<double>::infinity()) total += b;
    return total;
  }

  /// Fixing row r to a rules out segments requiring another alternative.
  /// Returns the touched groups so the caller can undo.
  std::vector<std::size_t> fix(std::size_t r, int a) {
    std::vector<std::size_t> touched;
    for (int other = 0; other < rows_.alternatives[r]; ++other) {
      if (other == a) continue;
      for (auto g : by_row_alt_[r][static_cast<std::size_t>(other)]) {
        if (violated_[g]++ == 0) touched.push_back(segments_.group[g]);
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (auto c : touched) group_best_[c] = recompute_group(c);
    return touched;
  }

  void unfix(std::size_t r, int a, const std::vector<std::size_t>& touched) {
    for (int other = 0; other < rows_.alternatives[r]; ++other) {
      if (other == a) continue;
      for (auto g : by_row_alt_[r][static_cast<std::size_t>(other)]) --violated_[g];
    }
    for (auto c : touched) group_best_[c] = recompute_group(c);
  }

  bool stop() {
    if (options_.node_limit != 0 && search_->nodes >= options_.node_limit) interrupted_ = true;
    if (deadline_ && (search_->nodes & 0xff) == 0 && Clock::now() >= *deadline_) interrupted_ = true;
    return interrupted_;
  }

  void descend(std::size_t row, double bound) {
    if (interrupted_ || stop()) return;
    ++search_->nodes;
    if (row == rows_.size()) {
      ++search_->leaves;
      // Every group has exactly one consistent segment here, so the bound is exact.
      if (!found_ || bound > incumbent_) {
        found_ = true;
        incumbent_ = bound;
        best_rule_ = rule_;
      }
      return;
    }
    std::vector<std::pair<double, int>> children;
    for (int a = 0; a < rows_.alternatives[row]; ++a) {
      const auto touched = fix(row, a);
      children.emplace_back(current_bound(), a);
      unfix(row, a, touched);
    }
    std::stable_sort(children.begin(), children.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    bool explored = false;
    for (const auto& [child_bound, a] : children) {
      if (found_ && child_bound <= incumbent_) continue;
      if (explored) ++search_->backtracks;
      explored = true;
      rule_[row] = a;
      const auto touched = fix(row, a);
      descend(row + 1, child_bound);
      unfix(row, a, touched);
      rule_[row] = -1;
      if (interrupted_) return;
    }
  }

  DecisionRowIndex rows_;
  SegmentRequirements segments_;
  const BranchAndBoundOptions& options_;
  std::vector<int> rule_;
  std::vector<double> value_;
  std::vector<int> violated_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::vector<std::vector<std::size_t>>> by_row_alt_;
  std::vector<double> group_best_;
  std::optional<Clock::time_point> deadline_;
  SearchStats* search_ = nullptr;
  bool interrupted_ = false;
  bool found_ = false;
  double incumbent_ = 0.0;
  std::vector<int> best_rule_;
};

}  // namespace

SolveResult solve_branch_and_bound(const InfluenceDiagram& diagram, const PathStatistics& stats,
                                   const BranchAndBoundOptions& options) {
  SolveResult result;
  if (options.time_limit == 0.0) {
    result.status = SolveStatus::timeout;
    return result;
  }
  const auto start = Clock::now();
  BranchAndBound search(diagram, stats, options);
  search.run(result.search);
  if (search.found()) {
    const DecisionRowIndex rows(diagram);
    result.strategy = empty_strategy(diagram);
    for (std::size_t r = 0; r < rows.size(); ++r)
      result.strategy.rules[static_cast<std::size_t>(rows.ordinal[r])][rows.info[r]] = search.best_rule()[r];
    result.objective = expected_utility_of_strategy(diagram, result.strategy);
    result.distribution = utility_distribution_of_strategy(diagram, result.strategy, options.statistics.utility_grid);
    result.status = search.interrupted() ? SolveStatus::feasible : SolveStatus::optimal;
  } else {
    result.status = SolveStatus::timeout;
  }
  result.timing.solve = std::chrono::duration<double>(Clock::now() - start).count();
  result.timing.finish();
  return result;
}

SolveResult solve_branch_and_bound(const InfluenceDiagram& diagram, const BranchAndBoundOptions& options) {
  const auto start = Clock::now();
  const auto stats = compute_path_statistics(diagram, options.statistics);
  const double preprocess = std::chrono::duration<double>(Clock::now() - start).count();
  auto result = solve_branch_and_bound(diagram, stats, options);
  result.timing.preprocess += preprocess;
  result.timing.finish();
  return result;
}

}  // namespace idmilp
