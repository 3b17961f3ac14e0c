#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "roadmind/agent.hpp"
#include "roadmind/backends.hpp"
#include "roadmind/config.hpp"
#include "roadmind/congestion.hpp"
#include "roadmind/llm_backend.hpp"
#include "roadmind/map_io.hpp"
#include "roadmind/request_manager.hpp"

namespace roadmind {

struct SpawnPlan {
  AgentId id = 0;
  double time = 0.0;
  NodeId origin = 0;
  NodeId destination = 0;
  AgentKind kind = AgentKind::ConcurrentPlanner;
};

/// Seeded demand: spawn instants uniform over [0, spawn_window], origin and
/// destination uniform over ordered pairs of distinct nodes. Kinds come from
/// a separate stream, so changing the mix leaves times and trips untouched.
inline std::vector<SpawnPlan> make_spawn_schedule(const ScenarioConfig& config, const RoadGraph& graph) {
  std::mt19937_64 demand(config.seed);
  std::mt19937_64 kinds(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> when(0.0, std::max(config.spawn_window, 0.0));
  const auto n = static_cast<NodeId>(graph.node_count());
  std::discrete_distribution<int> pick_kind({config.mix.astar, config.mix.sequential, config.mix.concurrent});

  std::vector<SpawnPlan> schedule;
  for (std::size_t i = 0; i < config.agents; ++i) {
    SpawnPlan plan;
    plan.id = static_cast<AgentId>(i);
    plan.time = config.spawn_window > 0.0 ? when(demand) : 0.0;
    plan.origin = std::uniform_int_distribution<NodeId>(0, n - 1)(demand);
    plan.destination = n > 1 ? std::uniform_int_distribution<NodeId>(0, n - 2)(demand) : plan.origin;
    if (n > 1 && plan.destination >= plan.origin) ++plan.destination;
    plan.kind = static_cast<AgentKind>(pick_kind(kinds));
    schedule.push_back(plan);
  }
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const SpawnPlan& a, const SpawnPlan& b) { return a.time < b.time; });
  return schedule;
}

/// FNV-1a over spawn times and trips (not kinds): equal across paired arms.
inline std::uint64_t schedule_hash(const std::vector<SpawnPlan>& schedule) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& s : schedule) {
    mix(&s.id, sizeof s.id);
    mix(&s.time, sizeof s.time);
    mix(&s.origin, sizeof s.origin);
    mix(&s.destination, sizeof s.destination);
  }
  return h;
}

inline std::shared_ptr<PlannerBackend> make_backend(const ScenarioConfig& config,
                                                    std::shared_ptr<const RoadGraph> graph) {
  LatencyModel latency = config.latency;
  if (config.latency_seed_from_run) latency.seed = config.seed;
  switch (config.backend) {
    case BackendKind::Oracle: return std::make_shared<OracleBackend>(graph, latency, RoutePolicy::CongestionAware);
    case BackendKind::Static: return std::make_shared<OracleBackend>(graph, latency, RoutePolicy::Static);
    case BackendKind::Silent: return std::make_shared<SilentBackend>();
    case BackendKind::Llm: return std::make_shared<LlmBackend>(graph, config.llm);
  }
  return nullptr;
}

struct CongestionSample {
  double time = 0.0;
  NodeId u = 0;
  NodeId v = 0;
  std::size_t occupancy = 0;
  double cf = 1.0;
};

struct AgentRecord {
  AgentId id = 0;
  AgentKind kind = AgentKind::AStarStatic;
  NodeId origin = 0;
  NodeId destination = 0;
  bool spawned = false;
  AgentState final_state = AgentState::Moving;
  JourneyStats stats;

  bool arrived() const noexcept { return final_state == AgentState::Arrived; }
  bool degenerate() const noexcept { return origin == destination; }
};

struct RunMetrics {
  std::string scenario;
  std::string arm;
  std::uint64_t seed = 0;
  std::uint64_t schedule_hash = 0;
  std::vector<AgentRecord> agents;

  std::size_t arrived = 0;
  std::size_t failed = 0;  // not arrived by max_sim_time
  double avg_journey_time = 0.0;
  double avg_wait_time = 0.0;
  double max_congestion = 1.0;       // peak CF on any edge over the run
  double mean_peak_congestion = 1.0;  // per-agent peak CF on traversed edges, averaged
  double avg_reroute_count = 0.0;
  double pre_arrival_rate = 0.0;
  std::size_t concurrent_requests = 0;

  double end_time = 0.0;
  std::size_t ticks = 0;
  ManagerStats manager;
  std::size_t unresolved_handles = 0;
  std::size_t waiting_at_end = 0;
  std::size_t stale_deliveries = 0;
  std::size_t conservation_violations = 0;
  std::vector<CongestionSample> trace;
};

/// Recomputes the aggregate fields from the per-agent records.
inline void aggregate(RunMetrics& m) {
  m.arrived = 0;
  m.failed = 0;
  double journey = 0.0, wait = 0.0, reroutes = 0.0, peak = 0.0;
  std::size_t counted = 0, concurrent = 0, early = 0;
  for (const auto& a : m.agents) {
    if (!a.arrived()) {
      ++m.failed;
    } else {
      ++m.arrived;
    }
    if (a.kind == AgentKind::ConcurrentPlanner) {
      for (const auto& r : a.stats.requests) {
        ++concurrent;
        if (r.resolved_before_arrival()) ++early;
      }
    }
    if (!a.arrived() || a.degenerate()) continue;
    ++counted;
    journey += *a.stats.journey_time();
    wait += a.stats.wait_time;
    reroutes += a.stats.reroute_count;
    peak += a.stats.peak_congestion;
  }
  m.avg_journey_time = counted ? journey / counted : 0.0;
  m.avg_wait_time = counted ? wait / counted : 0.0;
  m.avg_reroute_count = counted ? reroutes / counted : 0.0;
  m.mean_peak_congestion = counted ? peak / counted : 1.0;
  m.concurrent_requests = concurrent;
  m.pre_arrival_rate = concurrent ? static_cast<double>(early) / concurrent : 0.0;
}

struct TickReport {
  double now = 0.0;
  std::size_t spawned = 0;
  std::size_t delivered = 0;
  std::size_t issued = 0;
  std::size_t arrivals = 0;
  std::size_t edge_events = 0;
};

/// Fixed-step engine. Each tick runs, in order: clock, spawns, delivery of
/// planner answers, per-agent update in id order, registry update from the
/// collected edge events, metric sampling.
class Simulation {
 public:
  Simulation(ScenarioConfig config, std::shared_ptr<const RoadGraph> graph, std::shared_ptr<PlannerBackend> backend,
             std::string arm = {})
      : config_(std::move(config)), graph_(std::move(graph)), registry_(graph_, config_.footprint),
        manager_(std::make_unique<RequestManager>(
            std::move(backend), ManagerConfig{config_.max_in_flight, config_.max_queue, config_.timeout})),
        schedule_(make_spawn_schedule(config_, *graph_)), agents_(config_.agents) {
    validate(config_);
    metrics_.scenario = config_.name;
    metrics_.arm = arm.empty() ? describe_mix(config_.mix) : std::move(arm);
    metrics_.seed = config_.seed;
    metrics_.schedule_hash = schedule_hash(schedule_);
    wall_start_ = std::chrono::steady_clock::now();
  }

  double now() const noexcept { return now_; }
  std::size_t tick_count() const noexcept { return tick_; }
  const ScenarioConfig& config() const noexcept { return config_; }
  const RoadGraph& graph() const noexcept { return *graph_; }
  const CongestionRegistry& registry() const noexcept { return registry_; }
  const RequestManager& manager() const noexcept { return *manager_; }
  const std::vector<SpawnPlan>& spawn_schedule() const noexcept { return schedule_; }
  const std::vector<std::optional<Agent>>& agents() const noexcept { return agents_; }
  std::size_t conservation_violations() const noexcept { return metrics_.conservation_violations; }

  bool finished() const {
    if (now_ >= config_.max_sim_time - 1e-9) return true;
    if (next_spawn_ < schedule_.size()) return false;
    return std::all_of(agents_.begin(), agents_.end(),
                       [](const auto& a) { return a && a->state == AgentState::Arrived; });
  }

  TickReport run_tick() {
    TickReport report;
    ++tick_;
    now_ = static_cast<double>(tick_) * config_.dt;
    if (config_.clock == ClockMode::WallClock) {
      std::this_thread::sleep_until(wall_start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                      std::chrono::duration<double>(now_)));
    }
    report.now = now_;

    while (next_spawn_ < schedule_.size() && schedule_[next_spawn_].time <= now_ + 1e-9) {
      const SpawnPlan& s = schedule_[next_spawn_++];
      agents_[s.id] = spawn_agent(s.id, s.kind, s.origin, s.destination, config_.speed, *graph_, now_);
      ++report.spawned;
    }

    std::map<AgentId, std::vector<PlanResponse>> inboxes;
    for (auto& response : manager_->drain_completions(now_)) {
      ++report.delivered;
      inboxes[response.agent_id].push_back(std::move(response));
    }

    std::vector<AgentEvent> edge_events;
    StepContext ctx{*graph_, registry_, manager_.get(), now_, config_.dt, config_.report_threshold};
    for (auto& slot : agents_) {
      if (!slot) continue;
      Agent& agent = *slot;
      auto inbox_it = inboxes.find(agent.id);
      std::span<const PlanResponse> inbox;
      if (inbox_it != inboxes.end()) inbox = inbox_it->second;
      if (agent.state == AgentState::Arrived) {
        metrics_.stale_deliveries += inbox.size();
        continue;
      }
      for (auto& e : step_agent(agent, ctx, inbox)) {
        switch (e.kind) {
          case EventKind::EdgeEntered:
          case EventKind::EdgeExited: edge_events.push_back(e); break;
          case EventKind::StaleResponse: ++metrics_.stale_deliveries; break;
          case EventKind::RequestIssued: ++report.issued; break;
          case EventKind::Arrived:
            ++report.arrivals;
            if (e.handle) manager_->cancel(*e.handle);
            break;
          default: break;
        }
      }
    }

    for (const auto& e : edge_events) {
      if (e.kind == EventKind::EdgeEntered) {
        registry_.enter_edge(e.agent, e.edge, now_);
      } else {
        registry_.exit_edge(e.agent, e.edge, now_);
      }
    }
    report.edge_events = edge_events.size();

    sample();
    return report;
  }

  RunMetrics run_to_completion() {
    while (!finished()) run_tick();
    return collect();
  }

  /// Snapshot of metrics so far (final once finished()).
  RunMetrics collect() const {
    RunMetrics m = metrics_;
    for (const auto& plan : schedule_) {
      AgentRecord rec;
      rec.id = plan.id;
      rec.kind = plan.kind;
      rec.origin = plan.origin;
      rec.destination = plan.destination;
      if (const auto& a = agents_[plan.id]) {
        rec.spawned = true;
        rec.final_state = a->state;
        rec.stats = a->stats;
        if (a->state == AgentState::Waiting) ++m.waiting_at_end;
      }
      m.agents.push_back(std::move(rec));
    }
    std::sort(m.agents.begin(), m.agents.end(), [](const AgentRecord& a, const AgentRecord& b) { return a.id < b.id; });
    const auto& peaks = registry_.peak_factors();
    m.max_congestion = peaks.empty() ? 1.0 : *std::max_element(peaks.begin(), peaks.end());
    m.end_time = now_;
    m.ticks = tick_;
    m.manager = manager_->stats();
    m.unresolved_handles = manager_->unresolved();
    aggregate(m);
    return m;
  }

  static std::string describe_mix(const KindMix& mix) {
    if (mix.sequential == 0 && mix.concurrent == 0) return "astar";
    if (mix.astar == 0 && mix.concurrent == 0) return "sequential";
    if (mix.astar == 0 && mix.sequential == 0) return "concurrent";
    return "mixed";
  }

 private:
  void sample() {
    std::size_t on_edges = 0;
    for (auto& slot : agents_) {
      if (!slot) continue;
      if (const auto* edge = std::get_if<OnEdge>(&slot->location)) {
        ++on_edges;
        auto where = registry_.edge_of(slot->id);
        if (!where || *where != EdgeKey::of(edge->from, edge->to)) {
          ++metrics_.conservation_violations;
        } else {
          slot->stats.peak_congestion = std::max(slot->stats.peak_congestion, registry_.congestion_factor(*where));
        }
      } else if (registry_.edge_of(slot->id)) {
        ++metrics_.conservation_violations;
      }
    }
    if (on_edges != registry_.total_occupancy()) ++metrics_.conservation_violations;

    if (config_.trace_congestion) {
      for (const auto& e : graph_->edges()) {
        std::size_t occupancy = registry_.occupancy({e.u, e.v});
        if (occupancy == 0) continue;
        metrics_.trace.push_back({now_, e.u, e.v, occupancy, registry_.congestion_factor(EdgeKey{e.u, e.v})});
      }
    }
  }

  ScenarioConfig config_;
  std::shared_ptr<const RoadGraph> graph_;
  CongestionRegistry registry_;
  std::unique_ptr<RequestManager> manager_;
  std::vector<SpawnPlan> schedule_;
  std::vector<std::optional<Agent>> agents_;
  std::size_t next_spawn_ = 0;
  std::size_t tick_ = 0;
  double now_ = 0.0;
  RunMetrics metrics_;
  std::chrono::steady_clock::time_point wall_start_;
};

inline std::shared_ptr<const RoadGraph> load_graph(const ScenarioConfig& config) {
  if (config.map.empty() || config.map == "default") return std::make_shared<const RoadGraph>(default_map());
  return std::make_shared<const RoadGraph>(load_map(config.map));
}

/// Builds the engine for one run of `config`: map, registry, request
/// manager and the seeded spawn schedule.
inline std::unique_ptr<Simulation> init_scenario(const ScenarioConfig& config, std::string arm = {}) {
  validate(config);
  auto graph = load_graph(config);
  auto backend = make_backend(config, graph);
  return std::make_unique<Simulation>(config, graph, std::move(backend), std::move(arm));
}

inline RunMetrics run_scenario(const ScenarioConfig& config, std::string arm = {}) {
  return init_scenario(config, std::move(arm))->run_to_completion();
}

}  // namespace roadmind
