#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "roadmind/congestion.hpp"
#include "roadmind/network.hpp"
#include "roadmind/planner.hpp"
#include "roadmind/request_manager.hpp"

namespace roadmind {

enum class AgentState { Moving, Thinking, Waiting, Arrived };
enum class AgentKind { AStarStatic, SequentialPlanner, ConcurrentPlanner };
enum class TriggerReason { Initialization, UpcomingComplexNode, CongestionAhead };

inline const char* to_string(AgentState s) {
  switch (s) {
    case AgentState::Moving: return "moving";
    case AgentState::Thinking: return "thinking";
    case AgentState::Waiting: return "waiting";
    case AgentState::Arrived: return "arrived";
  }
  return "?";
}

inline const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::AStarStatic: return "astar";
    case AgentKind::SequentialPlanner: return "sequential";
    case AgentKind::ConcurrentPlanner: return "concurrent";
  }
  return "?";
}

inline const char* to_string(TriggerReason r) {
  switch (r) {
    case TriggerReason::Initialization: return "initialization";
    case TriggerReason::UpcomingComplexNode: return "complex-node";
    case TriggerReason::CongestionAhead: return "congestion-ahead";
  }
  return "?";
}

inline constexpr double kHighCongestion = 2.0;
inline constexpr std::size_t kDecisionDegree = 3;

enum class AgentErrorKind { CorruptBuffer, RequestAlreadyPending, NotAPlanner };

class AgentError : public std::runtime_error {
 public:
  AgentError(AgentErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  AgentErrorKind kind() const noexcept { return kind_; }

 private:
  AgentErrorKind kind_;
};

struct AtNode {
  NodeId node = 0;
};

struct OnEdge {
  std::size_t edge = 0;
  NodeId from = 0;
  NodeId to = 0;
  double progress = 0.0;
  double length = 0.0;
};

using Location = std::variant<AtNode, OnEdge>;

enum class Resolution { Pending, Applied, Discarded, Cancelled };

/// One planning request over its whole life, for per-node accounting.
struct RequestRecord {
  RequestId request_id = 0;
  TriggerReason reason = TriggerReason::Initialization;
  NodeId origin = 0;
  std::optional<NodeId> approach_from;  // concurrent: node the approach edge starts at
  double issued_at = 0.0;
  std::optional<double> resolved_at;
  std::optional<double> reached_origin_at;
  double wait = 0.0;
  Resolution resolution = Resolution::Pending;
  bool rerouted = false;

  /// Answer (of any kind) was in hand by the time the agent reached the origin.
  bool resolved_before_arrival() const {
    return resolved_at && (!reached_origin_at || *resolved_at <= *reached_origin_at);
  }
};

struct JourneyStats {
  double spawn_time = 0.0;
  std::optional<double> arrival_time;
  double wait_time = 0.0;
  int reroute_count = 0;
  Path route_taken;
  std::vector<RequestRecord> requests;
  int discarded_plans = 0;
  int fallback_replans = 0;
  int stale_responses = 0;
  double peak_congestion = 1.0;  // highest CF seen on an edge while driving it

  std::optional<double> journey_time() const {
    if (!arrival_time) return std::nullopt;
    return *arrival_time - spawn_time;
  }
};

struct PendingRequest {
  RequestId request_id = 0;
  NodeId origin = 0;
  std::size_t record = 0;
  std::optional<RequestHandle> handle;
};

struct Agent {
  AgentId id = 0;
  AgentKind kind = AgentKind::AStarStatic;
  double speed = 10.0;
  NodeId origin = 0;
  NodeId destination = 0;
  Location location = AtNode{};
  Path path_buffer;  // front is the next node the agent will stand on
  std::optional<PendingRequest> pending;
  AgentState state = AgentState::Moving;
  JourneyStats stats;
  bool initialized = false;
  std::optional<NodeId> latched_origin;

  bool at_node() const noexcept { return std::holds_alternative<AtNode>(location); }
  bool plans() const noexcept { return kind != AgentKind::AStarStatic; }
};

/// Node the agent currently stands on or drives toward.
inline NodeId next_node(const Agent& agent) {
  if (const auto* at = std::get_if<AtNode>(&agent.location)) return at->node;
  return std::get<OnEdge>(agent.location).to;
}

/// Places a new agent at `origin` with the static shortest path as its
/// standing route. A trip to its own origin is finished on the spot.
inline Agent spawn_agent(AgentId id, AgentKind kind, NodeId origin, NodeId destination, double speed,
                         const RoadGraph& graph, double now) {
  Agent agent;
  agent.id = id;
  agent.kind = kind;
  agent.speed = speed;
  agent.origin = origin;
  agent.destination = destination;
  agent.location = AtNode{origin};
  agent.path_buffer = plan_static(graph, origin, destination);
  agent.stats.spawn_time = now;
  agent.stats.route_taken = {origin};
  if (origin == destination) {
    agent.state = AgentState::Arrived;
    agent.stats.arrival_time = now;
  }
  return agent;
}

/// The node a request issued now would plan from: the far end of the next
/// edge for a concurrent agent, the current node for a sequential one.
inline std::optional<NodeId> plan_origin(const Agent& agent) {
  if (!agent.at_node()) return std::nullopt;
  if (agent.kind == AgentKind::SequentialPlanner) return next_node(agent);
  if (agent.kind == AgentKind::ConcurrentPlanner && agent.path_buffer.size() >= 2) return agent.path_buffer[1];
  return std::nullopt;
}

/// Decision point is the moment an agent is about to leave a node. At most
/// one request is issued per origin node until the agent has passed it.
inline std::optional<TriggerReason> evaluate_triggers(const Agent& agent, const RoadGraph& graph,
                                                      const CongestionRegistry& registry) {
  if (!agent.plans() || agent.state != AgentState::Moving || agent.pending) return std::nullopt;
  auto origin = plan_origin(agent);
  if (!origin || *origin == agent.destination || agent.latched_origin == origin) return std::nullopt;
  if (!agent.initialized) return TriggerReason::Initialization;
  if (graph.degree(*origin) >= kDecisionDegree) return TriggerReason::UpcomingComplexNode;

  auto start = std::find(agent.path_buffer.begin(), agent.path_buffer.end(), *origin);
  for (auto it = start; it != agent.path_buffer.end() && std::next(it) != agent.path_buffer.end(); ++it) {
    if (registry.congestion_factor(EdgeKey::of(*it, *std::next(it))) >= kHighCongestion) {
      return TriggerReason::CongestionAhead;
    }
  }
  return std::nullopt;
}

inline PlanRequest issue_precomputation(Agent& agent, TriggerReason trigger, NodeId upcoming_node,
                                        CongestionSnapshot snapshot, RequestId request_id, double now) {
  if (!agent.plans()) {
    throw AgentError(AgentErrorKind::NotAPlanner, fmt::format("agent {} uses static routing", agent.id));
  }
  if (agent.pending) {
    throw AgentError(AgentErrorKind::RequestAlreadyPending,
                     fmt::format("agent {} already waits on request {}", agent.id, agent.pending->request_id));
  }
  RequestRecord record;
  record.request_id = request_id;
  record.reason = trigger;
  record.origin = upcoming_node;
  record.issued_at = now;
  if (agent.kind == AgentKind::ConcurrentPlanner) {
    record.approach_from = next_node(agent);
  } else {
    record.reached_origin_at = now;
    agent.state = AgentState::Thinking;
  }
  agent.stats.requests.push_back(record);
  agent.pending = PendingRequest{request_id, upcoming_node, agent.stats.requests.size() - 1, std::nullopt};
  agent.latched_origin = upcoming_node;
  agent.initialized = true;
  return PlanRequest{request_id, agent.id, upcoming_node, agent.destination, std::move(snapshot), now};
}

/// Puts the agent on `node`. Returns the request cancelled by reaching the
/// destination, if one was still open.
inline std::optional<PendingRequest> handle_arrival(Agent& agent, NodeId node, double now) {
  agent.location = AtNode{node};
  if (agent.stats.route_taken.empty() || agent.stats.route_taken.back() != node) {
    agent.stats.route_taken.push_back(node);
  }
  if (agent.pending && agent.pending->origin == node) {
    agent.stats.requests[agent.pending->record].reached_origin_at = now;
  }
  if (node == agent.destination) {
    agent.state = AgentState::Arrived;
    agent.stats.arrival_time = now;
    agent.path_buffer = {node};
    std::optional<PendingRequest> open = std::move(agent.pending);
    agent.pending.reset();
    if (open) {
      auto& record = agent.stats.requests[open->record];
      record.resolution = Resolution::Cancelled;
      record.resolved_at = now;
    }
    return open;
  }
  agent.state = agent.pending && agent.pending->origin == node ? AgentState::Waiting : AgentState::Moving;
  return std::nullopt;
}

enum class PlanApplication { Applied, Discarded, Stale };

namespace detail {

inline void ensure_standing_route(Agent& agent, const RoadGraph& graph) {
  NodeId from = next_node(agent);
  if (!validate_path(graph, agent.path_buffer, from, agent.destination)) {
    agent.path_buffer = plan_static(graph, from, agent.destination);
    ++agent.stats.fallback_replans;
  }
}

}  // namespace detail

/// Splices a delivered plan into the path buffer, or discards it and keeps
/// the standing route. Either way the pending request is closed and a
/// halted agent moves again.
inline PlanApplication apply_plan(Agent& agent, const PlanResponse& response, const RoadGraph& graph, double now) {
  if (!agent.pending || agent.pending->request_id != response.request_id) {
    ++agent.stats.stale_responses;
    return PlanApplication::Stale;
  }
  RequestRecord& record = agent.stats.requests[agent.pending->record];
  record.resolved_at = now;
  agent.pending.reset();
  if (agent.state == AgentState::Thinking || agent.state == AgentState::Waiting) agent.state = AgentState::Moving;

  const NodeId from = next_node(agent);
  const Path* plan = response.path();
  bool usable = plan != nullptr && response.origin == from &&
                validate_path(graph, *plan, from, agent.destination).ok() && plan->size() >= 2;
  if (!usable) {
    record.resolution = Resolution::Discarded;
    ++agent.stats.discarded_plans;
    detail::ensure_standing_route(agent, graph);
    return PlanApplication::Discarded;
  }

  const Path& old = agent.path_buffer;
  bool changes_next_edge = old.size() >= 2 && old.front() == from && old[1] != (*plan)[1];
  if (changes_next_edge) {
    ++agent.stats.reroute_count;
    record.rerouted = true;
  }
  record.resolution = Resolution::Applied;
  agent.path_buffer = *plan;
  return PlanApplication::Applied;
}

enum class EventKind {
  EdgeEntered,
  EdgeExited,
  StateChanged,
  RequestIssued,
  PlanApplied,
  PlanDiscarded,
  StaleResponse,
  Arrived,
};

struct AgentEvent {
  EventKind kind = EventKind::StateChanged;
  AgentId agent = 0;
  EdgeKey edge{};
  NodeId node = 0;
  AgentState state = AgentState::Moving;
  std::optional<RequestHandle> handle;  // RequestIssued, or request abandoned on Arrived
};

struct StepContext {
  const RoadGraph& graph;
  const CongestionRegistry& registry;
  RequestManager* manager = nullptr;  // required for planning agents
  double now = 0.0;
  double dt = 0.1;
  double report_threshold = kDefaultReportThreshold;
};

namespace detail {

inline void depart(Agent& agent, const RoadGraph& graph, std::vector<AgentEvent>& events) {
  const NodeId here = next_node(agent);
  if (agent.path_buffer.size() < 2 || agent.path_buffer.front() != here) {
    // Empty buffer away from the destination: static replan.
    agent.path_buffer = plan_static(graph, here, agent.destination);
    ++agent.stats.fallback_replans;
  }
  if (auto verdict = validate_path(graph, agent.path_buffer, here, agent.destination); !verdict) {
    throw AgentError(AgentErrorKind::CorruptBuffer,
                     fmt::format("agent {} holds an invalid route at node {}: {}", agent.id, here, verdict.describe()));
  }
  agent.path_buffer.erase(agent.path_buffer.begin());
  const NodeId to = agent.path_buffer.front();
  const std::size_t edge = *graph.find_edge(here, to);
  if (agent.latched_origin == here) agent.latched_origin.reset();
  agent.initialized = true;
  agent.location = OnEdge{edge, here, to, 0.0, graph.edge(edge).length};
  events.push_back({EventKind::EdgeEntered, agent.id, EdgeKey::of(here, to), to, agent.state, {}});
}

}  // namespace detail

/// One tick for one agent: deliver plans, maybe issue a request, then move
/// or accrue wait. Edge transitions come back as events for the registry.
inline std::vector<AgentEvent> step_agent(Agent& agent, const StepContext& ctx,
                                          std::span<const PlanResponse> inbox = {}) {
  std::vector<AgentEvent> events;
  if (agent.state == AgentState::Arrived) return events;
  const AgentState before = agent.state;

  for (const auto& response : inbox) {
    switch (apply_plan(agent, response, ctx.graph, ctx.now)) {
      case PlanApplication::Applied: events.push_back({EventKind::PlanApplied, agent.id, {}, 0, agent.state, {}}); break;
      case PlanApplication::Discarded: events.push_back({EventKind::PlanDiscarded, agent.id, {}, 0, agent.state, {}}); break;
      case PlanApplication::Stale: events.push_back({EventKind::StaleResponse, agent.id, {}, 0, agent.state, {}}); break;
    }
  }

  if (agent.plans() && ctx.manager != nullptr) {
    if (auto trigger = evaluate_triggers(agent, ctx.graph, ctx.registry)) {
      NodeId origin = *plan_origin(agent);
      PlanRequest request = issue_precomputation(agent, *trigger, origin, ctx.registry.snapshot(ctx.now, ctx.report_threshold),
                                                 ctx.manager->next_request_id(), ctx.now);
      RequestHandle handle = ctx.manager->submit(std::move(request), ctx.now);
      agent.pending->handle = handle;
      events.push_back({EventKind::RequestIssued, agent.id, {}, origin, agent.state, handle});
    }
  }

  switch (agent.state) {
    case AgentState::Thinking:
    case AgentState::Waiting:
      agent.stats.wait_time += ctx.dt;
      if (agent.pending) agent.stats.requests[agent.pending->record].wait += ctx.dt;
      break;
    case AgentState::Moving: {
      if (agent.at_node()) detail::depart(agent, ctx.graph, events);
      auto& edge = std::get<OnEdge>(agent.location);
      edge.progress += agent.speed * ctx.dt;
      if (edge.progress >= edge.length - 1e-9) {
        edge.progress = edge.length;
        const NodeId to = edge.to;
        events.push_back({EventKind::EdgeExited, agent.id, EdgeKey::of(edge.from, edge.to), to, agent.state, {}});
        auto abandoned = handle_arrival(agent, to, ctx.now);
        if (agent.state == AgentState::Arrived) {
          AgentEvent arrived{EventKind::Arrived, agent.id, {}, to, AgentState::Arrived, {}};
          if (abandoned) arrived.handle = abandoned->handle;
          events.push_back(arrived);
        }
      }
      break;
    }
    case AgentState::Arrived: break;
  }

  if (agent.state != before) events.push_back({EventKind::StateChanged, agent.id, {}, next_node(agent), agent.state, {}});
  return events;
}

}  // namespace roadmind
