#pragma once

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace idmilp {

enum class VarType { continuous, binary };
enum class RowSense { le, eq, ge };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  VarType type = VarType::continuous;
};

struct Term {
  int var = -1;
  double coef = 0.0;
  bool operator==(const Term&) const = default;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

/// Solver-agnostic MILP: maximize objective subject to linear rows.
class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper, VarType type,
                   std::string meaning = {});
  int add_binary(std::string name, std::string meaning = {}) {
    return add_variable(std::move(name), 0.0, 1.0, VarType::binary, std::move(meaning));
  }
  /// Throws std::invalid_argument when a term references an undeclared
  /// variable or the name is already taken.
  int add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  void set_objective(std::vector<Term> terms);
  void add_objective_term(int var, double coef);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  Constraint& constraint(std::size_t i) { return constraints_[i]; }
  const std::vector<Term>& objective() const { return objective_; }

  int variable_index(std::string_view name) const;  // -1 when absent
  std::size_t binary_count() const;
  std::size_t nonzero_count() const;

  /// Variable name -> diagram meaning (e.g. "z(D=yes | R1=dry)").
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<Term> objective_;
  std::unordered_map<std::string, int> index_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace idmilp
