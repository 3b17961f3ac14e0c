#include <gtest/gtest.h>

#include "roadmind/roadmind.hpp"

using namespace roadmind;

namespace {

ScenarioConfig small(AgentKind kind, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.agents = 10;
  c.seed = seed;
  c.mix = KindMix::only(kind);
  return c;
}

}  // namespace

TEST(Schedule, DeterministicAndInsideWindow) {
  auto g = default_map();
  ScenarioConfig c;
  c.seed = 42;
  c.agents = 40;
  auto a = make_spawn_schedule(c, g);
  auto b = make_spawn_schedule(c, g);
  ASSERT_EQ(a.size(), 40u);
  EXPECT_EQ(schedule_hash(a), schedule_hash(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_GE(a[i].time, 0.0);
    EXPECT_LE(a[i].time, 10.0);
    EXPECT_NE(a[i].origin, a[i].destination);
    if (i) {
      EXPECT_LE(a[i - 1].time, a[i].time);
    }
  }
  c.seed = 43;
  EXPECT_NE(schedule_hash(make_spawn_schedule(c, g)), schedule_hash(a));
}

TEST(Schedule, ZeroWindowSpawnsAtOnce) {
  ScenarioConfig c;
  c.spawn_window = 0.0;
  for (const auto& s : make_spawn_schedule(c, default_map())) EXPECT_EQ(s.time, 0.0);
}

TEST(Schedule, ArmsShareDemand) {
  auto g = default_map();
  auto a = make_spawn_schedule(small(AgentKind::AStarStatic, 5), g);
  auto b = make_spawn_schedule(small(AgentKind::ConcurrentPlanner, 5), g);
  EXPECT_EQ(schedule_hash(a), schedule_hash(b));
}

TEST(Engine, IdleTickOnlyAdvancesClock) {
  ScenarioConfig c = small(AgentKind::AStarStatic);
  c.spawn_window = 100.0;
  c.seed = 3;
  auto sim = init_scenario(c);
  double first = sim->spawn_schedule().front().time;
  ASSERT_GT(first, 0.25);
  auto report = sim->run_tick();
  EXPECT_NEAR(report.now, 0.1, 1e-12);
  EXPECT_EQ(report.spawned, 0u);
  EXPECT_EQ(report.edge_events, 0u);
  EXPECT_EQ(sim->registry().total_occupancy(), 0u);
}

TEST(Engine, SameTickEntriesCountedTogether) {
  // Two agents spawning at t=0 on the same first edge.
  auto graph = std::make_shared<const RoadGraph>(default_map());
  ScenarioConfig c;
  c.agents = 2;
  c.spawn_window = 0.0;
  c.mix = KindMix::only(AgentKind::AStarStatic);
  // Search for a seed whose two trips start on the same edge.
  for (std::uint64_t seed = 1; seed < 5000; ++seed) {
    c.seed = seed;
    auto s = make_spawn_schedule(c, *graph);
    auto p0 = plan_static(*graph, s[0].origin, s[0].destination);
    auto p1 = plan_static(*graph, s[1].origin, s[1].destination);
    if (EdgeKey::of(p0[0], p0[1]) == EdgeKey::of(p1[0], p1[1])) {
      Simulation sim(c, graph, make_backend(c, graph));
      sim.run_tick();
      EdgeKey e = EdgeKey::of(p0[0], p0[1]);
      EXPECT_EQ(sim.registry().occupancy(e), 2u);
      double len = graph->edge(*graph->find_edge(e)).length;
      EXPECT_NEAR(sim.registry().congestion_factor(e), 1.0 + 200.0 / len, 1e-12);
      EXPECT_EQ(sim.conservation_violations(), 0u);
      return;
    }
  }
  FAIL() << "no seed puts both trips on one edge";
}

TEST(Engine, WaitingAgentResumesInDeliveryTick) {
  auto graph = std::make_shared<const RoadGraph>(default_map());
  ScenarioConfig c = small(AgentKind::ConcurrentPlanner);
  c.agents = 1;
  c.spawn_window = 0.0;
  c.latency = LatencyModel::fixed(20.0);
  c.timeout = 30.0;
  // A trip of several straight edges, so the agent waits at its first node.
  for (std::uint64_t seed = 1;; ++seed) {
    c.seed = seed;
    auto s = make_spawn_schedule(c, *graph);
    auto p = plan_static(*graph, s[0].origin, s[0].destination);
    if (p.size() >= 3 && graph->edge_length(p[0], p[1]) == 150.0) break;
  }
  Simulation sim(c, graph, make_backend(c, graph));
  bool checked = false;
  while (!sim.finished()) {
    bool was_waiting = sim.agents()[0] && sim.agents()[0]->state == AgentState::Waiting;
    auto report = sim.run_tick();
    if (was_waiting && report.delivered > 0) {
      EXPECT_EQ(sim.agents()[0]->state, AgentState::Moving);
      EXPECT_FALSE(sim.agents()[0]->at_node());
      checked = true;
    }
  }
  EXPECT_TRUE(checked);
}

TEST(Engine, SingleTripKinematics) {
  // A lone static agent on one 150 m edge at 10 m/s.
  auto graph = std::make_shared<const RoadGraph>(default_map());
  ScenarioConfig c;
  c.agents = 1;
  c.spawn_window = 0.0;
  c.mix = KindMix::only(AgentKind::AStarStatic);
  for (std::uint64_t seed = 1;; ++seed) {
    c.seed = seed;
    auto s = make_spawn_schedule(c, *graph);
    if (graph->has_edge(s[0].origin, s[0].destination) && graph->edge_length(s[0].origin, s[0].destination) == 150.0) break;
  }
  RunMetrics m = run_scenario(c);
  ASSERT_EQ(m.arrived, 1u);
  EXPECT_NEAR(m.avg_journey_time, 15.0, c.dt + 1e-9);
}

TEST(Engine, Deterministic) {
  ScenarioConfig c = small(AgentKind::ConcurrentPlanner, 9);
  c.agents = 25;
  auto a = run_scenario(c);
  auto b = run_scenario(c);
  EXPECT_EQ(journeys_csv(a), journeys_csv(b));
  EXPECT_EQ(run_summary_json(a).dump(), run_summary_json(b).dump());
  EXPECT_EQ(requests_csv(a), requests_csv(b));
}

TEST(Engine, AllKindsArriveWithConservation) {
  for (auto kind : {AgentKind::AStarStatic, AgentKind::SequentialPlanner, AgentKind::ConcurrentPlanner}) {
    ScenarioConfig c = small(kind, 4);
    c.agents = 30;
    auto m = run_scenario(c);
    EXPECT_EQ(m.arrived, 30u) << to_string(kind);
    EXPECT_EQ(m.conservation_violations, 0u);
    EXPECT_EQ(m.unresolved_handles, 0u);
    if (kind == AgentKind::AStarStatic) {
      EXPECT_EQ(m.manager.submitted, 0u);
    }
  }
}

TEST(Engine, MixedPopulation) {
  ScenarioConfig c;
  c.agents = 30;
  c.mix = {1.0, 1.0, 1.0};
  auto m = run_scenario(c);
  EXPECT_EQ(m.arm, "mixed");
  std::set<AgentKind> kinds;
  for (const auto& a : m.agents) kinds.insert(a.kind);
  EXPECT_EQ(kinds.size(), 3u);
  EXPECT_EQ(m.arrived, 30u);
}

TEST(Engine, TraceRecordsOccupiedEdges) {
  ScenarioConfig c = small(AgentKind::AStarStatic);
  c.trace_congestion = true;
  auto m = run_scenario(c);
  ASSERT_FALSE(m.trace.empty());
  double peak = 1.0;
  for (const auto& s : m.trace) {
    EXPECT_GE(s.occupancy, 1u);
    peak = std::max(peak, s.cf);
  }
  EXPECT_DOUBLE_EQ(peak, m.max_congestion);
}

TEST(Engine, MaxSimTimeStopsRun) {
  ScenarioConfig c = small(AgentKind::AStarStatic);
  c.max_sim_time = 5.0;
  auto m = run_scenario(c);
  EXPECT_NEAR(m.end_time, 5.0, 1e-9);
  EXPECT_EQ(m.arrived + m.failed, 10u);
  EXPECT_GT(m.failed, 0u);
}

TEST(Config, Validation) {
  ScenarioConfig c;
  c.repetitions = 0;
  EXPECT_THROW(init_scenario(c), InvalidConfig);
  c = ScenarioConfig{};
  c.agents = 0;
  EXPECT_THROW(validate(c), InvalidConfig);
  c = ScenarioConfig{};
  c.dt = 0.0;
  EXPECT_THROW(validate(c), InvalidConfig);
  EXPECT_THROW(config_from_json(nlohmann::json{{"agnets", 4}}), InvalidConfig);
  EXPECT_THROW(config_from_json(nlohmann::json{{"agents", "many"}}), InvalidConfig);
  EXPECT_THROW(config_from_json(nlohmann::json{{"kind", "teleport"}}), InvalidConfig);
}

TEST(Config, Parsing) {
  auto doc = nlohmann::json::parse(R"({"name":"x","agents":12,"kind":"sequential","latency":{"kind":"uniform","lo":1,"hi":2},
                                       "backend":"silent","clock":"wall","llm_model":"m"})");
  auto c = config_from_json(doc);
  EXPECT_EQ(c.agents, 12u);
  EXPECT_EQ(c.mix.sequential, 1.0);
  EXPECT_EQ(c.latency.kind, LatencyKind::Uniform);
  EXPECT_EQ(c.backend, BackendKind::Silent);
  EXPECT_EQ(c.clock, ClockMode::WallClock);
  EXPECT_EQ(c.llm.model, "m");

  auto over = apply_overrides(nlohmann::json{{"latency", 3.2}}, {"seed=7", "latency.value=5", "name=run"});
  auto oc = config_from_json(over);
  EXPECT_EQ(oc.seed, 7u);
  EXPECT_DOUBLE_EQ(oc.latency.a, 5.0);
  EXPECT_EQ(oc.name, "run");
  EXPECT_THROW(apply_overrides({}, {"novalue"}), InvalidConfig);
}

TEST(Summary, IdenticalRunsHaveZeroSpread) {
  ScenarioConfig c = small(AgentKind::ConcurrentPlanner);
  std::vector<RunMetrics> runs;
  for (int i = 0; i < 10; ++i) runs.push_back(run_scenario(c));
  auto s = summarize(runs);
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].runs, 10u);
  EXPECT_DOUBLE_EQ(s.rows[0].avg_journey_time.std, 0.0);
  EXPECT_DOUBLE_EQ(s.rows[0].avg_wait_time.std, 0.0);
  EXPECT_DOUBLE_EQ(s.rows[0].max_congestion.std, 0.0);
  EXPECT_DOUBLE_EQ(s.rows[0].avg_journey_time.mean, runs[0].avg_journey_time);
}

TEST(Summary, RowsPerArmInFixedOrder) {
  std::vector<RunMetrics> runs;
  for (auto kind : {AgentKind::ConcurrentPlanner, AgentKind::AStarStatic}) runs.push_back(run_scenario(small(kind)));
  auto s = summarize(runs);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].arm, "astar");
  EXPECT_EQ(s.rows[1].arm, "concurrent");
  std::string table = flow_table(s, "scenario");
  EXPECT_NE(table.find("max cong."), std::string::npos);
  EXPECT_NE(table.find("reroute freq."), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
}

TEST(Summary, MeanStd) {
  auto v = mean_std({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  EXPECT_DOUBLE_EQ(v.mean, 5.0);
  EXPECT_NEAR(v.std, 2.138089935299395, 1e-12);
  EXPECT_DOUBLE_EQ(mean_std({3.0}).std, 0.0);
}

TEST(Artifacts, LayoutAndCsv) {
  auto m = run_scenario(small(AgentKind::ConcurrentPlanner));
  auto dir = std::filesystem::temp_directory_path() / "roadmind-artifacts-test";
  std::filesystem::remove_all(dir);
  write_run_artifacts(dir, m, true);
  for (const char* f : {"journeys.csv", "requests.csv", "summary.json", "congestion.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::string csv = journeys_csv(m);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "agent_id,kind,spawn,arrival,journey_s,wait_s,reroutes,route");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  std::filesystem::remove_all(dir);
}
