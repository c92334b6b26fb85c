#pragma once

#include <cmath>
#include <string>

#include "idmilp/diagram.hpp"
#include "idmilp/generators.hpp"

namespace support {

inline idmilp::DiagramDefinition oil(int tests, std::uint64_t seed = 1) { return idmilp::generate_oil(tests, seed); }
inline idmilp::DiagramDefinition water(int states, std::uint64_t seed = 1) {
  return idmilp::generate_water(states, seed);
}
inline idmilp::DiagramDefinition turbine(int states, std::uint64_t seed = 1) {
  return idmilp::generate_turbine(states, seed);
}

inline idmilp::InfluenceDiagram build(const idmilp::DiagramDefinition& def) {
  return idmilp::InfluenceDiagram::build(def);
}

/// Relative agreement with an absolute floor of one.
inline bool close(double a, double b, double tol = 1e-6) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Command line of the bundled HiGHS backend.
inline std::string highs_command() { return IDMILP_HIGHS_COMMAND; }

}  // namespace support
