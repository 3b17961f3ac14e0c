#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace roadmind;

namespace {

RoadGraph two_nodes() { return build_graph({{0, {0, 0}}, {1, {100, 0}}}, {{0, 1, 100.0}}); }

GraphErrorKind build_error(std::vector<Node> nodes, std::vector<Edge> edges) {
  try {
    build_graph(std::move(nodes), std::move(edges));
  } catch (const GraphError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected GraphError";
  return GraphErrorKind::EmptyInput;
}

}  // namespace

TEST(BuildGraph, SmallestGraph) {
  RoadGraph g = two_nodes();
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_EQ(g.degree(1), 1u);
}

TEST(BuildGraph, CanonicalizesEdgeDirection) {
  RoadGraph g = build_graph({{0, {0, 0}}, {1, {100, 0}}}, {{1, 0, 100.0}});
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.edge(0).u, 0u);
  EXPECT_EQ(g.edge(0).v, 1u);
  EXPECT_TRUE(g.has_edge(1, 0));
}

TEST(BuildGraph, RejectsBadInput) {
  EXPECT_EQ(build_error({}, {}), GraphErrorKind::EmptyInput);
  EXPECT_EQ(build_error({{0, {0, 0}}}, {{0, 0, 10.0}}), GraphErrorKind::SelfLoop);
  EXPECT_EQ(build_error({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1, 1.0}, {1, 0, 1.0}}), GraphErrorKind::DuplicateEdge);
  EXPECT_EQ(build_error({{0, {0, 0}}, {1, {1, 0}}}, {{0, 7, 1.0}}), GraphErrorKind::UnknownEndpoint);
  EXPECT_EQ(build_error({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1, 0.0}}), GraphErrorKind::NonpositiveLength);
  EXPECT_EQ(build_error({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1, -3.0}}), GraphErrorKind::NonpositiveLength);
}

TEST(DefaultMap, Shape) {
  RoadGraph g = default_map();
  EXPECT_EQ(g.node_count(), 12u);
  EXPECT_EQ(g.edge_count(), 20u);
  EXPECT_DOUBLE_EQ(g.edge_length(0, 1), 150.0);
  EXPECT_NEAR(g.edge_length(0, 5), 212.13203435596427, 1e-9);
  EXPECT_TRUE(g.is_connected());
}

TEST(DefaultMap, DegreesMatchIncidentEdgeCount) {
  RoadGraph g = default_map();
  // Reference degrees from counting incident edges of the map definition.
  const std::vector<std::size_t> expected = {3, 3, 3, 2, 3, 6, 5, 3, 2, 3, 4, 3};
  for (NodeId n = 0; n < 12; ++n) {
    std::size_t incident = 0;
    for (const auto& e : g.edges()) incident += (e.u == n) + (e.v == n);
    EXPECT_EQ(node_degree(g, n), expected[n]) << "node " << n;
    EXPECT_EQ(incident, expected[n]);
  }
  EXPECT_EQ(node_degree(two_nodes(), 0), 1u);
  EXPECT_THROW(node_degree(g, 99), GraphError);
}

TEST(AStar, IdentityPath) {
  EXPECT_EQ(astar_shortest_path(default_map(), 5, 5), (Path{5}));
}

TEST(AStar, DirectEdgeBeatsDetour) {
  RoadGraph g = build_graph({{0, {0, 0}}, {1, {100, 0}}, {2, {50, 200}}},
                            {{0, 1, 100.0}, {1, 2, std::hypot(50.0, 200.0)}, {0, 2, std::hypot(50.0, 200.0)}});
  EXPECT_EQ(astar_shortest_path(g, 0, 1), (Path{0, 1}));
}

TEST(AStar, CornerToCornerMatchesEnumeration) {
  RoadGraph g = default_map();
  auto best = oracle::shortest(g, 0, 11);
  Path p = astar_shortest_path(g, 0, 11);
  EXPECT_NEAR(path_length(g, p), best.cost, 1e-9);
  EXPECT_NEAR(best.cost, 574.2640687119285, 1e-9);
  // Two optimal routes exist; ties go to the lexicographically smallest.
  ASSERT_EQ(best.optimal.size(), 2u);
  EXPECT_EQ(p, (Path{0, 5, 6, 11}));
}

TEST(AStar, TieBreakOnGrid) {
  RoadGraph g = default_map();
  EXPECT_EQ(astar_shortest_path(g, 2, 9), (Path{2, 1, 5, 9}));
  EXPECT_EQ(astar_shortest_path(g, 3, 8), (Path{3, 2, 1, 0, 4, 8}));
  EXPECT_EQ(astar_shortest_path(g, 0, 3), (Path{0, 1, 2, 3}));
}

TEST(AStar, UnknownAndUnreachable) {
  RoadGraph g = build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {5, 5}}, {3, {6, 5}}}, {{0, 1, 1.0}, {2, 3, 1.0}});
  EXPECT_FALSE(g.is_connected());
  try {
    astar_shortest_path(g, 0, 3);
    FAIL();
  } catch (const GraphError& e) {
    EXPECT_EQ(e.kind(), GraphErrorKind::Unreachable);
  }
  try {
    astar_shortest_path(g, 0, 9);
    FAIL();
  } catch (const GraphError& e) {
    EXPECT_EQ(e.kind(), GraphErrorKind::UnknownNode);
  }
}

TEST(AStar, AllPairsMatchEnumeration) {
  RoadGraph g = default_map();
  for (NodeId s = 0; s < 12; ++s) {
    for (NodeId t = 0; t < 12; ++t) {
      if (s == t) continue;
      auto best = oracle::shortest(g, s, t);
      EXPECT_EQ(astar_shortest_path(g, s, t), best.optimal.front()) << s << "->" << t;
    }
  }
}

// Random planar-ish graphs with lengths >= euclidean distance, so the
// straight-line heuristic stays admissible.
TEST(AStar, RandomGraphsMatchEnumeration) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 250; ++trial) {
    std::uniform_int_distribution<int> size(2, 8);
    int n = size(rng);
    std::uniform_real_distribution<double> coord(0.0, 500.0);
    std::vector<Node> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(i), {std::round(coord(rng)), std::round(coord(rng))}});
    std::vector<Edge> edges;
    std::bernoulli_distribution keep(0.45);
    std::uniform_real_distribution<double> stretch(1.0, 1.6);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (!keep(rng)) continue;
        double d = std::max(1.0, euclidean(nodes[a].position, nodes[b].position));
        edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), d * stretch(rng)});
      }
    }
    RoadGraph g;
    try {
      g = build_graph(nodes, edges);
    } catch (const GraphError&) {
      continue;  // coincident points
    }
    for (NodeId s = 0; s < g.node_count(); ++s) {
      for (NodeId t = 0; t < g.node_count(); ++t) {
        auto best = oracle::shortest(g, s, t);
        if (best.optimal.empty()) {
          EXPECT_THROW(astar_shortest_path(g, s, t), GraphError);
          continue;
        }
        Path p = astar_shortest_path(g, s, t);
        EXPECT_TRUE(validate_path(g, p, s, t).ok());
        EXPECT_NEAR(path_length(g, p), best.cost, 1e-6 * std::max(1.0, best.cost));
      }
    }
  }
}

TEST(ValidatePath, Cases) {
  RoadGraph g = default_map();
  EXPECT_TRUE(validate_path(g, {2, 6, 10, 9}, 2, 9).ok());
  EXPECT_TRUE(validate_path(g, {2, 1, 5, 9}, 2, 9).ok());
  auto missing = validate_path(g, {2, 9}, 2, 9);
  EXPECT_EQ(missing.issue, PathIssue::MissingEdge);
  EXPECT_EQ(missing.u, 2u);
  EXPECT_EQ(missing.v, 9u);
  EXPECT_EQ(validate_path(g, {}, 2, 9).issue, PathIssue::EmptyPath);
  EXPECT_EQ(validate_path(g, {2, 40, 9}, 2, 9).issue, PathIssue::UnknownNode);
  EXPECT_EQ(validate_path(g, {1, 5, 9}, 2, 9).issue, PathIssue::WrongStart);
  EXPECT_EQ(validate_path(g, {2, 6, 10}, 2, 9).issue, PathIssue::WrongEnd);
}

TEST(ValidatePath, PathFromDescriptionExample) {
  // A graph that does contain 2-5, 5-8 and 8-9.
  std::vector<Node> nodes;
  for (NodeId i = 0; i < 10; ++i) nodes.push_back({i, {i * 10.0, (i % 3) * 7.0}});
  RoadGraph g = build_graph(nodes, {{2, 5, 30.0}, {5, 8, 30.0}, {8, 9, 10.0}, {0, 1, 10.0}});
  EXPECT_TRUE(validate_path(g, {2, 5, 8, 9}, 2, 9).ok());
}

TEST(MapIo, RoundTrip) {
  RoadGraph g = default_map();
  EXPECT_EQ(map_from_json(map_to_json(g)), g);
}

TEST(MapIo, MissingLengthMeansStraight) {
  auto doc = nlohmann::json::parse(R"({"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":30,"y":40}],
                                       "edges":[{"u":1,"v":0}]})");
  RoadGraph g = map_from_json(doc);
  EXPECT_DOUBLE_EQ(g.edge_length(0, 1), 50.0);
}

TEST(MapIo, MissingFileIsIoError) {
  EXPECT_THROW(load_map("/nonexistent/map.json"), std::ios_base::failure);
}
