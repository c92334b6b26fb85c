#include "idmilp/diagram_io.hpp"

#include <fstream>
#include <sstream>

namespace idmilp {

using nlohmann::json;

DiagramDefinition definition_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("diagram document must be a JSON object");
  DiagramDefinition def;
  try {
    for (const auto& n : doc.at("nodes")) {
      Node node;
      node.name = n.at("name").get<std::string>();
      node.kind = node_kind_from_string(n.at("kind").get<std::string>());
      if (n.contains("states")) node.states = n.at("states").get<std::vector<std::string>>();
      def.nodes.push_back(std::move(node));
    }
    if (doc.contains("arcs")) {
      for (const auto& a : doc.at("arcs")) {
        if (!a.is_array() || a.size() != 2) throw std::invalid_argument("each arc must be [parent, child]");
        def.arcs.push_back({a[0].get<std::string>(), a[1].get<std::string>()});
      }
    }
    if (doc.contains("cpts"))
      for (const auto& [name, rows] : doc.at("cpts").items())
        def.cpts[name] = rows.get<std::vector<std::vector<double>>>();
    if (doc.contains("utilities"))
      for (const auto& [name, values] : doc.at("utilities").items())
        def.utilities[name] = values.get<std::vector<double>>();
    if (doc.contains("notes")) def.notes = doc.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed diagram document: ") + e.what());
  }
  return def;
}

json to_json(const DiagramDefinition& def) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : def.nodes) {
    json node{{"name", n.name}, {"kind", std::string(to_string(n.kind))}};
    node["states"] = n.states;
    doc["nodes"].push_back(std::move(node));
  }
  doc["arcs"] = json::array();
  for (const auto& a : def.arcs) doc["arcs"].push_back({a.parent, a.child});
  doc["cpts"] = json::object();
  for (const auto& [name, rows] : def.cpts) doc["cpts"][name] = rows;
  doc["utilities"] = json::object();
  for (const auto& [name, values] : def.utilities) doc["utilities"][name] = values;
  if (!def.notes.empty()) doc["notes"] = def.notes;
  return doc;
}

DiagramDefinition load_definition(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
  return definition_from_json(doc);
}

void save_definition(const DiagramDefinition& def, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << to_json(def).dump(1) << '\n';
}

std::string canonical_text(const DiagramDefinition& def) { return to_json(def).dump(); }

}  // namespace idmilp
