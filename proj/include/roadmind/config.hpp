#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "roadmind/agent.hpp"
#include "roadmind/llm_backend.hpp"
#include "roadmind/planner.hpp"

namespace roadmind {

enum class BackendKind { Oracle, Static, Silent, Llm };
enum class ClockMode { VirtualTime, WallClock };

/// Relative weights of agent kinds in a population.
struct KindMix {
  double astar = 0.0;
  double sequential = 0.0;
  double concurrent = 1.0;

  static KindMix only(AgentKind kind) {
    switch (kind) {
      case AgentKind::AStarStatic: return {1.0, 0.0, 0.0};
      case AgentKind::SequentialPlanner: return {0.0, 1.0, 0.0};
      case AgentKind::ConcurrentPlanner: return {0.0, 0.0, 1.0};
    }
    return {};
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string map = "default";  // "default" or a map file path
  std::size_t agents = 10;
  KindMix mix;
  double spawn_window = 10.0;
  std::uint64_t seed = 1;
  double dt = 0.1;
  double speed = 10.0;
  BackendKind backend = BackendKind::Oracle;
  LatencyModel latency = LatencyModel::fixed(3.2);
  bool latency_seed_from_run = true;
  double footprint = kDefaultFootprint;
  double report_threshold = kDefaultReportThreshold;
  double timeout = 10.0;
  std::size_t max_in_flight = 4;
  std::size_t max_queue = 256;
  double max_sim_time = 3600.0;
  std::size_t repetitions = 1;
  bool trace_congestion = false;
  ClockMode clock = ClockMode::VirtualTime;
  ChatSettings llm;
};

class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid scenario config";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

inline std::optional<AgentKind> parse_agent_kind(const std::string& text) {
  if (text == "astar") return AgentKind::AStarStatic;
  if (text == "sequential") return AgentKind::SequentialPlanner;
  if (text == "concurrent") return AgentKind::ConcurrentPlanner;
  return std::nullopt;
}

inline void validate(const ScenarioConfig& c) {
  std::vector<std::string> problems;
  if (c.agents < 1) problems.push_back("agents: must be at least 1");
  if (!(c.dt > 0.0)) problems.push_back("dt: must be positive");
  if (!(c.speed > 0.0)) problems.push_back("speed: must be positive");
  if (!(c.spawn_window >= 0.0)) problems.push_back("spawn_window: must be non-negative");
  if (!std::isfinite(c.max_sim_time) || !(c.max_sim_time > 0.0)) problems.push_back("max_sim_time: must be finite and positive");
  if (c.repetitions < 1) problems.push_back("repetitions: must be at least 1");
  if (!(c.footprint > 0.0)) problems.push_back("footprint: must be positive");
  if (!(c.timeout > 0.0)) problems.push_back("timeout: must be positive");
  if (c.max_in_flight < 1) problems.push_back("max_in_flight: must be at least 1");
  if (c.max_queue < 1) problems.push_back("max_queue: must be at least 1");
  if (c.mix.astar < 0 || c.mix.sequential < 0 || c.mix.concurrent < 0 ||
      c.mix.astar + c.mix.sequential + c.mix.concurrent <= 0) {
    problems.push_back("mix: weights must be non-negative with a positive sum");
  }
  if (c.latency.kind == LatencyKind::Fixed && c.latency.a < 0) problems.push_back("latency.value: must be non-negative");
  if (c.latency.kind == LatencyKind::Uniform && (c.latency.a < 0 || c.latency.b < c.latency.a)) {
    problems.push_back("latency: uniform needs 0 <= lo <= hi");
  }
  if (c.latency.kind == LatencyKind::LogNormal && !(c.latency.b >= 0)) problems.push_back("latency.sigma: must be non-negative");
  if (!problems.empty()) throw InvalidConfig(std::move(problems));
}

/// Reads a scenario document. Every field is optional; unknown keys are
/// rejected so typos do not silently fall back to defaults.
inline ScenarioConfig config_from_json(const nlohmann::json& doc) {
  ScenarioConfig c;
  std::vector<std::string> problems;
  if (!doc.is_object()) throw InvalidConfig({"config must be a JSON object"});

  auto read = [&](const char* key, auto& target) {
    if (!doc.contains(key)) return;
    try {
      doc.at(key).get_to(target);
    } catch (const nlohmann::json::exception&) {
      problems.push_back(fmt::format("{}: wrong type ({})", key, doc.at(key).dump()));
    }
  };

  static const std::vector<std::string> kKnown = {
      "name", "map", "agents", "kind", "mix", "spawn_window", "seed", "dt", "speed", "backend", "latency",
      "footprint", "report_threshold", "timeout", "max_in_flight", "max_queue", "max_sim_time", "repetitions",
      "trace_congestion", "clock", "llm_url", "llm_model", "llm_timeout"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) problems.push_back(fmt::format("{}: unknown field", key));
  }

  read("name", c.name);
  read("map", c.map);
  read("agents", c.agents);
  read("spawn_window", c.spawn_window);
  read("seed", c.seed);
  read("dt", c.dt);
  read("speed", c.speed);
  read("footprint", c.footprint);
  read("report_threshold", c.report_threshold);
  read("timeout", c.timeout);
  read("max_in_flight", c.max_in_flight);
  read("max_queue", c.max_queue);
  read("max_sim_time", c.max_sim_time);
  read("repetitions", c.repetitions);
  read("trace_congestion", c.trace_congestion);
  read("llm_url", c.llm.base_url);
  read("llm_model", c.llm.model);
  read("llm_timeout", c.llm.timeout_seconds);

  if (doc.contains("kind")) {
    auto kind = doc["kind"].is_string() ? parse_agent_kind(doc["kind"].get<std::string>()) : std::nullopt;
    if (kind) {
      c.mix = KindMix::only(*kind);
    } else {
      problems.push_back("kind: expected astar, sequential or concurrent");
    }
  }
  if (doc.contains("mix")) {
    const auto& mix = doc["mix"];
    if (!mix.is_object()) {
      problems.push_back("mix: expected an object of weights");
    } else {
      c.mix = {mix.value("astar", 0.0), mix.value("sequential", 0.0), mix.value("concurrent", 0.0)};
    }
  }
  if (doc.contains("backend")) {
    std::string b = doc["backend"].is_string() ? doc["backend"].get<std::string>() : "";
    if (b == "oracle") c.backend = BackendKind::Oracle;
    else if (b == "static") c.backend = BackendKind::Static;
    else if (b == "silent") c.backend = BackendKind::Silent;
    else if (b == "llm") c.backend = BackendKind::Llm;
    else problems.push_back("backend: expected oracle, static, silent or llm");
  }
  if (doc.contains("clock")) {
    std::string m = doc["clock"].is_string() ? doc["clock"].get<std::string>() : "";
    if (m == "virtual") c.clock = ClockMode::VirtualTime;
    else if (m == "wall") c.clock = ClockMode::WallClock;
    else problems.push_back("clock: expected virtual or wall");
  }
  if (doc.contains("latency")) {
    const auto& l = doc["latency"];
    try {
      if (l.is_number()) {
        c.latency = LatencyModel::fixed(l.get<double>());
      } else {
        std::string kind = l.value("kind", std::string("fixed"));
        if (kind == "fixed") {
          c.latency = LatencyModel::fixed(l.value("value", 0.0));
        } else if (kind == "uniform") {
          c.latency = LatencyModel::uniform(l.value("lo", 0.0), l.value("hi", 0.0), 0);
        } else if (kind == "lognormal") {
          c.latency = LatencyModel::lognormal(l.value("mu", 0.0), l.value("sigma", 0.0), 0);
        } else {
          problems.push_back("latency.kind: expected fixed, uniform or lognormal");
        }
        if (l.contains("seed")) {
          c.latency.seed = l["seed"].get<std::uint64_t>();
          c.latency_seed_from_run = false;
        }
      }
    } catch (const nlohmann::json::exception&) {
      problems.push_back("latency: malformed (" + l.dump() + ")");
    }
  }
  if (!problems.empty()) throw InvalidConfig(std::move(problems));
  validate(c);
  return c;
}

/// Built-in demand levels as config documents: "low" (10 agents) and
/// "high" (40 agents), both spawning over 10 s on the default map.
inline nlohmann::json density_preset(const std::string& level) {
  if (level == "low") return {{"name", "low_density"}, {"agents", 10}, {"spawn_window", 10.0}};
  if (level == "high") return {{"name", "high_density"}, {"agents", 40}, {"spawn_window", 10.0}};
  throw InvalidConfig({fmt::format("density '{}': expected low or high", level)});
}

/// Applies `key=value` overrides. Dotted keys address nested objects
/// (`latency.value=5`); values are parsed as JSON, falling back to a string.
inline nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidConfig({fmt::format("override '{}': expected key=value", item)});
    std::string key = item.substr(0, eq);
    std::string raw = item.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    nlohmann::json::json_pointer ptr("/" + [&] {
      std::string p = key;
      std::replace(p.begin(), p.end(), '.', '/');
      return p;
    }());
    if (key.rfind("latency.", 0) == 0 && doc.contains("latency") && doc["latency"].is_number()) {
      doc["latency"] = {{"kind", "fixed"}, {"value", doc["latency"]}};
    }
    doc[ptr] = value;
  }
  return doc;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) throw InvalidConfig({path + ": not valid JSON"});
  return doc;
}

}  // namespace roadmind
