// Smallest use of the library: one scenario per agent kind, stepped by hand,
// printing the busiest edge every ten simulated seconds.

#include <iostream>

#include "roadmind/roadmind.hpp"

using namespace roadmind;

int main() {
  ScenarioConfig config;
  config.name = "quickstart";
  config.agents = 20;
  config.latency = LatencyModel::fixed(3.2);

  for (auto kind : {AgentKind::AStarStatic, AgentKind::SequentialPlanner, AgentKind::ConcurrentPlanner}) {
    config.mix = KindMix::only(kind);
    auto sim = init_scenario(config, to_string(kind));
    while (!sim->finished()) {
      sim->run_tick();
      if (sim->tick_count() % 100 == 0) {
        double worst = 1.0;
        for (const auto& e : sim->registry().snapshot(sim->now(), 1.0).entries) worst = std::max(worst, e.cf);
        std::cout << fmt::format("{:>10} t={:5.1f}s busiest edge CF {:.2f}\n", to_string(kind), sim->now(), worst);
      }
    }
    std::cout << run_line(sim->collect()) << "\n\n";
  }
}
