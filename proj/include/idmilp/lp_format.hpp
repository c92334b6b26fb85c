#pragma once

#include <string>
#include <string_view>

#include "idmilp/model.hpp"

namespace idmilp {

/// Writes the model in CPLEX-style LP format. Rows and columns keep model
/// order; every variable is listed under Bounds in index order so a parse
/// reproduces column order. Coefficients use 17 significant digits.
std::string export_lp(const MilpModel& model);

/// Parses the LP subset produced by export_lp (plus the usual spellings of
/// section keywords and bound forms). Zero coefficients are dropped; general
/// integers and minimization are rejected.
MilpModel parse_lp(std::string_view text);

}  // namespace idmilp
