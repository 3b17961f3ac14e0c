#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <variant>

#include <fmt/format.h>
#include <json.hpp>

#include "roadmind/congestion.hpp"
#include "roadmind/network.hpp"

namespace roadmind {

using RequestId = std::uint64_t;

struct PlanRequest {
  RequestId request_id = 0;
  AgentId agent_id = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  CongestionSnapshot snapshot;
  double issued_at = 0.0;
};

enum class FailureReason { Timeout, QueueFull, Malformed, BackendError, Unreachable };

inline const char* to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::Timeout: return "timeout";
    case FailureReason::QueueFull: return "queue-full";
    case FailureReason::Malformed: return "malformed";
    case FailureReason::BackendError: return "backend-error";
    case FailureReason::Unreachable: return "unreachable";
  }
  return "unknown";
}

struct PlanFailure {
  FailureReason reason = FailureReason::BackendError;
  std::string detail;
};

using PlanOutcome = std::variant<Path, PlanFailure>;

struct PlanResponse {
  RequestId request_id = 0;
  AgentId agent_id = 0;
  NodeId origin = 0;
  PlanOutcome outcome;
  double latency = 0.0;

  bool succeeded() const noexcept { return std::holds_alternative<Path>(outcome); }
  const Path* path() const noexcept { return std::get_if<Path>(&outcome); }
};

inline Path plan_static(const RoadGraph& graph, NodeId origin, NodeId destination) {
  return astar_shortest_path(graph, origin, destination);
}

/// Cheapest route under sum(length * CF), CF taken from the snapshot
/// (1.0 for unlisted edges). Same tie-break as astar_shortest_path.
inline Path plan_congestion_aware(const RoadGraph& graph, const CongestionSnapshot& snapshot, NodeId origin,
                                  NodeId destination) {
  return detail::best_path(
      graph, origin, destination,
      [&](std::size_t e) {
        const Edge& edge = graph.edge(e);
        return edge.length * snapshot.factor(edge.u, edge.v);
      },
      [](NodeId) { return 0.0; });
}

/// Three labeled sections: map, live congestion, task. Byte-stable for equal inputs.
inline std::string build_prompt(const RoadGraph& graph, const CongestionSnapshot& snapshot, NodeId origin,
                                NodeId destination) {
  std::string out;
  out += "### 1. Static Map Context\n";
  out += fmt::format("The road network has {} intersections and {} two-way roads.\n", graph.node_count(),
                     graph.edge_count());
  out += "Intersections (id: x, y in meters) and their connections (neighbor: road length in meters):\n";
  for (const auto& node : graph.nodes()) {
    out += fmt::format("- node {}: ({:.1f}, {:.1f}) ->", node.id, node.position.x, node.position.y);
    bool first = true;
    for (const auto& adj : graph.neighbors(node.id)) {
      out += fmt::format("{} {}: {:.1f}", first ? "" : ",", adj.neighbor, graph.edge(adj.edge).length);
      first = false;
    }
    out += "\n";
  }
  out += "\n### 2. Dynamic State\n";
  if (snapshot.empty()) {
    out += "No congested roads.\n";
  } else {
    out += "Congested roads as [node, node, congestion factor] (1.0 means free flow):\n";
    out += snapshot_to_json(snapshot);
    out += "\n";
  }
  out += "\n### 3. Navigation Task\n";
  out += fmt::format("You are at node {}. Your destination is node {}.\n", origin, destination);
  out += "Weigh road length against the reported congestion and choose a route.\n";
  out += fmt::format(
      "Answer with only a JSON array of node ids that starts with {} and ends with {}, "
      "where consecutive ids are directly connected.\n",
      origin, destination);
  return out;
}

enum class ParseErrorKind { NoArrayFound, NonIntegerElement, EmptyArray };

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::NoArrayFound;
  std::string excerpt;

  std::string describe() const {
    switch (kind) {
      case ParseErrorKind::NoArrayFound: return "no JSON array found in: " + excerpt;
      case ParseErrorKind::NonIntegerElement: return "array holds a non-integer element: " + excerpt;
      case ParseErrorKind::EmptyArray: return "array is empty";
    }
    return "unknown parse error";
  }
};

using ParseResult = std::variant<Path, ParseError>;

namespace detail {

inline std::string excerpt(std::string_view text, std::size_t limit = 80) {
  if (text.size() <= limit) return std::string(text);
  return std::string(text.substr(0, limit)) + "...";
}

}  // namespace detail

/// Pulls the last complete top-level bracketed array out of free text, so
/// reasoning before the final answer is tolerated. Only structure is checked.
inline ParseResult parse_path_from_text(std::string_view text) {
  std::optional<std::string_view> last;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t open = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (depth > 0 && in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (depth > 0 && c == '"') {
      in_string = true;
    } else if (c == '[') {
      if (depth == 0) open = i;
      ++depth;
    } else if (c == ']' && depth > 0) {
      if (--depth == 0) last = text.substr(open, i - open + 1);
    }
  }
  if (!last) return ParseError{ParseErrorKind::NoArrayFound, detail::excerpt(text)};

  nlohmann::json array = nlohmann::json::parse(*last, nullptr, /*allow_exceptions=*/false);
  if (array.is_discarded() || !array.is_array()) {
    return ParseError{ParseErrorKind::NonIntegerElement, detail::excerpt(*last)};
  }
  if (array.empty()) return ParseError{ParseErrorKind::EmptyArray, std::string(*last)};
  Path path;
  for (const auto& element : array) {
    if (!element.is_number_integer() || element.get<std::int64_t>() < 0 ||
        element.get<std::int64_t>() > std::numeric_limits<NodeId>::max()) {
      return ParseError{ParseErrorKind::NonIntegerElement, detail::excerpt(*last)};
    }
    path.push_back(static_cast<NodeId>(element.get<std::int64_t>()));
  }
  return path;
}

inline std::string path_to_json(const Path& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", path[i]);
  return out + "]";
}

enum class LatencyKind { Fixed, Uniform, LogNormal };

/// Planner response delay. Fixed uses `a`; Uniform draws from [a, b];
/// LogNormal uses mu = a, sigma = b.
struct LatencyModel {
  LatencyKind kind = LatencyKind::Fixed;
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;

  static LatencyModel fixed(double seconds) { return {LatencyKind::Fixed, seconds, 0.0, 0}; }
  static LatencyModel uniform(double lo, double hi, std::uint64_t seed) { return {LatencyKind::Uniform, lo, hi, seed}; }
  static LatencyModel lognormal(double mu, double sigma, std::uint64_t seed) {
    return {LatencyKind::LogNormal, mu, sigma, seed};
  }
};

/// Each draw gets its own generator keyed by (seed, index), so a value never
/// depends on how many draws came before it.
inline double sample_latency(const LatencyModel& model, std::uint64_t draw_index) {
  if (model.kind == LatencyKind::Fixed) return std::max(0.0, model.a);
  std::seed_seq seq{static_cast<std::uint32_t>(model.seed), static_cast<std::uint32_t>(model.seed >> 32),
                    static_cast<std::uint32_t>(draw_index), static_cast<std::uint32_t>(draw_index >> 32)};
  std::mt19937_64 rng(seq);
  if (model.kind == LatencyKind::Uniform) {
    std::uniform_real_distribution<double> dist(std::min(model.a, model.b), std::max(model.a, model.b));
    return std::max(0.0, dist(rng));
  }
  std::lognormal_distribution<double> dist(model.a, model.b);
  return dist(rng);
}

}  // namespace roadmind
