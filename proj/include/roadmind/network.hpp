#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace roadmind {

using NodeId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double euclidean(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Node {
  NodeId id = 0;
  Point position;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Undirected road segment. Stored with u < v after graph construction.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double length = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Canonical (u < v) identifier of an undirected edge.
struct EdgeKey {
  NodeId u = 0;
  NodeId v = 0;

  static EdgeKey of(NodeId a, NodeId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Ordered node sequence. A single-node path is the identity route.
using Path = std::vector<NodeId>;

enum class GraphErrorKind {
  EmptyInput,
  InvalidNode,
  DuplicateEdge,
  SelfLoop,
  UnknownEndpoint,
  NonpositiveLength,
  UnknownNode,
  Unreachable,
};

class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  GraphErrorKind kind() const noexcept { return kind_; }

 private:
  GraphErrorKind kind_;
};

struct Adjacency {
  NodeId neighbor = 0;
  std::size_t edge = 0;
};

/// Immutable undirected weighted graph. Adjacency lists are sorted by
/// neighbor id so every traversal is deterministic.
class RoadGraph {
 public:
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool contains(NodeId n) const noexcept { return n < nodes_.size(); }

  const Node& node(NodeId n) const {
    require_node(n);
    return nodes_[n];
  }

  Point position(NodeId n) const { return node(n).position; }

  const Edge& edge(std::size_t index) const { return edges_.at(index); }

  std::span<const Adjacency> neighbors(NodeId n) const {
    require_node(n);
    return adjacency_[n];
  }

  std::size_t degree(NodeId n) const { return neighbors(n).size(); }

  std::optional<std::size_t> find_edge(NodeId a, NodeId b) const {
    if (!contains(a) || !contains(b)) return std::nullopt;
    for (const auto& adj : adjacency_[a]) {
      if (adj.neighbor == b) return adj.edge;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> find_edge(EdgeKey key) const { return find_edge(key.u, key.v); }

  bool has_edge(NodeId a, NodeId b) const { return find_edge(a, b).has_value(); }

  double edge_length(NodeId a, NodeId b) const {
    auto e = find_edge(a, b);
    if (!e) {
      throw GraphError(GraphErrorKind::UnknownEndpoint, fmt::format("no edge ({}, {})", a, b));
    }
    return edges_[*e].length;
  }

  bool is_connected() const {
    if (nodes_.empty()) return true;
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      for (const auto& adj : adjacency_[n]) {
        if (!seen[adj.neighbor]) {
          seen[adj.neighbor] = true;
          ++reached;
          stack.push_back(adj.neighbor);
        }
      }
    }
    return reached == nodes_.size();
  }

  friend bool operator==(const RoadGraph& a, const RoadGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend RoadGraph build_graph(std::vector<Node> nodes, std::vector<Edge> edges);

  void require_node(NodeId n) const {
    if (!contains(n)) {
      throw GraphError(GraphErrorKind::UnknownNode, fmt::format("unknown node {}", n));
    }
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacency>> adjacency_;
};

/// Validates and assembles a graph. Node ids must form the dense range
/// 0..N-1 (any input order). Edges are canonicalized to u < v and sorted.
inline RoadGraph build_graph(std::vector<Node> nodes, std::vector<Edge> edges) {
  if (nodes.empty()) throw GraphError(GraphErrorKind::EmptyInput, "graph has no nodes");
  if (edges.empty()) throw GraphError(GraphErrorKind::EmptyInput, "graph has no edges");

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.id != i) {
      throw GraphError(GraphErrorKind::InvalidNode,
                       fmt::format("node ids must be dense 0..{}, found {}", nodes.size() - 1, n.id));
    }
    if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
      throw GraphError(GraphErrorKind::InvalidNode, fmt::format("node {} has a non-finite position", n.id));
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].position == nodes[j].position) {
        throw GraphError(GraphErrorKind::InvalidNode,
                         fmt::format("nodes {} and {} share a position", nodes[i].id, nodes[j].id));
      }
    }
  }

  for (auto& e : edges) {
    if (e.u == e.v) throw GraphError(GraphErrorKind::SelfLoop, fmt::format("self-loop at node {}", e.u));
    if (e.u >= nodes.size() || e.v >= nodes.size()) {
      throw GraphError(GraphErrorKind::UnknownEndpoint,
                       fmt::format("edge ({}, {}) references an unknown node", e.u, e.v));
    }
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw GraphError(GraphErrorKind::NonpositiveLength,
                       fmt::format("edge ({}, {}) has non-positive length {}", e.u, e.v, e.length));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return EdgeKey{a.u, a.v} < EdgeKey{b.u, b.v};
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
      throw GraphError(GraphErrorKind::DuplicateEdge,
                       fmt::format("duplicate edge ({}, {})", edges[i].u, edges[i].v));
    }
  }

  RoadGraph g;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.adjacency_.resize(g.nodes_.size());
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    g.adjacency_[g.edges_[i].u].push_back({g.edges_[i].v, i});
    g.adjacency_[g.edges_[i].v].push_back({g.edges_[i].u, i});
  }
  for (auto& list : g.adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Adjacency& a, const Adjacency& b) { return a.neighbor < b.neighbor; });
  }
  return g;
}

inline std::size_t node_degree(const RoadGraph& graph, NodeId n) { return graph.degree(n); }

namespace detail {

/// Best-first search from `goal` back to `start` on an undirected graph.
/// `edge_cost` must be positive, `to_start` a consistent lower bound on the
/// remaining cost to `start` (zero gives Dijkstra). Search keeps expanding
/// until every node that could lie on an optimal route is settled, then the
/// route is read forward from `start`, picking the smallest next id among
/// cost-optimal continuations.
inline Path best_path(const RoadGraph& graph, NodeId start, NodeId goal,
                      const std::function<double(std::size_t)>& edge_cost,
                      const std::function<double(NodeId)>& to_start) {
  if (!graph.contains(start) || !graph.contains(goal)) {
    throw GraphError(GraphErrorKind::UnknownNode, fmt::format("unknown node in query {} -> {}", start, goal));
  }
  if (start == goal) return Path{start};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = graph.node_count();
  std::vector<double> cost_to_goal(n, kInf);
  std::vector<bool> settled(n, false);

  using Item = std::pair<double, NodeId>;  // (f, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost_to_goal[goal] = 0.0;
  open.push({to_start(goal), goal});

  double best = kInf;
  while (!open.empty()) {
    auto [f, node] = open.top();
    if (f > best + 1e-9 * std::max(1.0, best)) break;
    open.pop();
    if (settled[node]) continue;
    settled[node] = true;
    if (node == start) best = cost_to_goal[node];
    for (const auto& adj : graph.neighbors(node)) {
      double g = cost_to_goal[node] + edge_cost(adj.edge);
      if (g < cost_to_goal[adj.neighbor]) {
        cost_to_goal[adj.neighbor] = g;
        open.push({g + to_start(adj.neighbor), adj.neighbor});
      }
    }
  }
  if (!settled[start]) {
    throw GraphError(GraphErrorKind::Unreachable, fmt::format("node {} is unreachable from {}", goal, start));
  }

  const double eps = 1e-9 * std::max(1.0, best);
  Path path{start};
  NodeId cur = start;
  while (cur != goal) {
    std::optional<NodeId> next;
    for (const auto& adj : graph.neighbors(cur)) {
      if (!settled[adj.neighbor]) continue;
      double through = edge_cost(adj.edge) + cost_to_goal[adj.neighbor];
      if (std::abs(through - cost_to_goal[cur]) <= eps) {
        next = adj.neighbor;
        break;
      }
    }
    if (!next || path.size() > n) {
      throw GraphError(GraphErrorKind::Unreachable, "inconsistent search state while reading route");
    }
    cur = *next;
    path.push_back(cur);
  }
  return path;
}

}  // namespace detail

/// Shortest path by edge length. Straight-line distance to the start is the
/// heuristic (admissible while length >= Euclidean distance). Among equal
/// length routes the lexicographically smallest node sequence wins.
inline Path astar_shortest_path(const RoadGraph& graph, NodeId start, NodeId goal) {
  if (!graph.contains(start) || !graph.contains(goal)) {
    throw GraphError(GraphErrorKind::UnknownNode, fmt::format("unknown node in query {} -> {}", start, goal));
  }
  const Point origin = graph.position(start);
  return detail::best_path(
      graph, start, goal, [&](std::size_t e) { return graph.edge(e).length; },
      [&](NodeId n) { return euclidean(graph.position(n), origin); });
}

inline double path_length(const RoadGraph& graph, const Path& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += graph.edge_length(path[i - 1], path[i]);
  return total;
}

enum class PathIssue { Ok, EmptyPath, UnknownNode, WrongStart, WrongEnd, MissingEdge };

/// Outcome of validate_path. `u`/`v` name the offending node(s) when relevant.
struct PathVerdict {
  PathIssue issue = PathIssue::Ok;
  NodeId u = 0;
  NodeId v = 0;

  bool ok() const noexcept { return issue == PathIssue::Ok; }
  explicit operator bool() const noexcept { return ok(); }

  std::string describe() const {
    switch (issue) {
      case PathIssue::Ok: return "ok";
      case PathIssue::EmptyPath: return "empty path";
      case PathIssue::UnknownNode: return fmt::format("unknown node {}", u);
      case PathIssue::WrongStart: return fmt::format("path starts at {}", u);
      case PathIssue::WrongEnd: return fmt::format("path ends at {}", u);
      case PathIssue::MissingEdge: return fmt::format("missing edge ({}, {})", u, v);
    }
    return "unknown";
  }
};

inline PathVerdict validate_path(const RoadGraph& graph, const Path& path, NodeId expected_start,
                                 NodeId destination) {
  if (path.empty()) return {PathIssue::EmptyPath};
  for (NodeId n : path) {
    if (!graph.contains(n)) return {PathIssue::UnknownNode, n};
  }
  if (path.front() != expected_start) return {PathIssue::WrongStart, path.front()};
  if (path.back() != destination) return {PathIssue::WrongEnd, path.back()};
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!graph.has_edge(path[i - 1], path[i])) return {PathIssue::MissingEdge, path[i - 1], path[i]};
  }
  return {};
}

/// 4x3 grid (row-major ids, 150 m spacing) plus diagonals 0-5, 5-10, 6-11:
/// 12 intersections, 20 two-way segments, all straight.
inline RoadGraph default_map() {
  constexpr double kSpacing = 150.0;
  constexpr int kCols = 4;
  constexpr int kRows = 3;
  std::vector<Node> nodes;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      nodes.push_back({static_cast<NodeId>(r * kCols + c), {c * kSpacing, r * kSpacing}});
    }
  }
  auto straight = [&](NodeId a, NodeId b) {
    return Edge{a, b, euclidean(nodes[a].position, nodes[b].position)};
  };
  std::vector<Edge> edges;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c + 1 < kCols; ++c) {
      NodeId a = static_cast<NodeId>(r * kCols + c);
      edges.push_back(straight(a, a + 1));
    }
  }
  for (int r = 0; r + 1 < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      NodeId a = static_cast<NodeId>(r * kCols + c);
      edges.push_back(straight(a, a + kCols));
    }
  }
  edges.push_back(straight(0, 5));
  edges.push_back(straight(5, 10));
  edges.push_back(straight(6, 11));
  return build_graph(std::move(nodes), std::move(edges));
}

}  // namespace roadmind
