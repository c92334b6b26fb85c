#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "idmilp/diagram.hpp"

namespace idmilp {

/// JSON document: {nodes:[{name,kind,states}], arcs:[[parent,child]],
/// cpts:{node:[[...]]}, utilities:{node:[...]}, notes:[...]}.
/// Throws std::invalid_argument on malformed documents; semantic problems
/// are left to validate_diagram.
DiagramDefinition definition_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DiagramDefinition& definition);

DiagramDefinition load_definition(const std::filesystem::path& file);
void save_definition(const DiagramDefinition& definition, const std::filesystem::path& file);

/// Canonical serialized text; byte-identical for identical diagrams.
std::string canonical_text(const DiagramDefinition& definition);

}  // namespace idmilp
