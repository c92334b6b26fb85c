#include "idmilp/model.hpp"

#include <stdexcept>

namespace idmilp {

int MilpModel::add_variable(std::string name, double lower, double upper, VarType type, std::string meaning) {
  if (index_.count(name)) throw std::invalid_argument("duplicate variable name " + name);
  if (type == VarType::binary && (lower != 0.0 || upper != 1.0))
    throw std::invalid_argument("binary variable " + name + " must have bounds [0, 1]");
  const int id = static_cast<int>(variables_.size());
  index_.emplace(name, id);
  if (!meaning.empty()) metadata_.emplace(name, std::move(meaning));
  variables_.push_back({std::move(name), lower, upper, type});
  return id;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  for (const auto& t : terms)
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= variables_.size())
      throw std::invalid_argument("constraint " + name + " references an undeclared variable");
  constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(constraints_.size() - 1);
}

void MilpModel::set_objective(std::vector<Term> terms) {
  for (const auto& t : terms)
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= variables_.size())
      throw std::invalid_argument("objective references an undeclared variable");
  objective_ = std::move(terms);
}

void MilpModel::add_objective_term(int var, double coef) {
  if (var < 0 || static_cast<std::size_t>(var) >= variables_.size())
    throw std::invalid_argument("objective references an undeclared variable");
  objective_.push_back({var, coef});
}

int MilpModel::variable_index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

std::size_t MilpModel::binary_count() const {
  std::size_t n = 0;
  for (const auto& v : variables_) n += v.type == VarType::binary;
  return n;
}

std::size_t MilpModel::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& c : constraints_) n += c.terms.size();
  return n;
}

}  // namespace idmilp
