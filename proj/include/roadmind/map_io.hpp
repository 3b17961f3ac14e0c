#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "roadmind/network.hpp"

namespace roadmind {

/// Map documents look like
///   {"nodes": [{"id": 0, "x": 0, "y": 0}, ...],
///    "edges": [{"u": 0, "v": 1, "length": 150.0}, ...]}
/// An edge without "length" is straight: its length is the endpoint distance.
inline RoadGraph map_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges")) {
    throw GraphError(GraphErrorKind::EmptyInput, "map document needs \"nodes\" and \"edges\" arrays");
  }
  std::vector<Node> nodes;
  for (const auto& n : doc.at("nodes")) {
    nodes.push_back({n.at("id").get<NodeId>(), {n.at("x").get<double>(), n.at("y").get<double>()}});
  }
  auto position_of = [&](NodeId id) -> std::optional<Point> {
    for (const auto& n : nodes) {
      if (n.id == id) return n.position;
    }
    return std::nullopt;
  };
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges")) {
    Edge edge{e.at("u").get<NodeId>(), e.at("v").get<NodeId>(), 0.0};
    if (e.contains("length") && !e.at("length").is_null()) {
      edge.length = e.at("length").get<double>();
    } else {
      auto a = position_of(edge.u);
      auto b = position_of(edge.v);
      if (!a || !b) {
        throw GraphError(GraphErrorKind::UnknownEndpoint,
                         fmt::format("edge ({}, {}) references an unknown node", edge.u, edge.v));
      }
      edge.length = euclidean(*a, *b);
    }
    edges.push_back(edge);
  }
  return build_graph(std::move(nodes), std::move(edges));
}

inline nlohmann::json map_to_json(const RoadGraph& graph) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    doc["nodes"].push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    doc["edges"].push_back({{"u", e.u}, {"v", e.v}, {"length", e.length}});
  }
  return doc;
}

inline RoadGraph load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open map file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return map_from_json(nlohmann::json::parse(buffer.str()));
}

}  // namespace roadmind
