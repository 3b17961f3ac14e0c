// Command-line front end: single runs, paired comparisons, map utilities and
// a connectivity probe for a live chat-completions endpoint.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "roadmind/roadmind.hpp"

namespace fs = std::filesystem;
using namespace roadmind;

namespace {

enum Exit { kOk = 0, kFailure = 1, kBadConfig = 2, kIoError = 3, kProbeFailed = 4 };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string clock;
  std::string llm_url;
  std::string llm_model;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--set", c.overrides, "Override a config field, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Base seed (repetition k uses seed + k)");
  cmd->add_option("--clock", c.clock, "virtual or wall")->check(CLI::IsMember({"virtual", "wall"}));
  cmd->add_option("--llm-url", c.llm_url, "Chat completions base URL (default: $ROADMIND_LLM_URL)");
  cmd->add_option("--llm-model", c.llm_model, "Model id sent to the endpoint");
}

nlohmann::json finish_doc(nlohmann::json doc, const Common& c) {
  if (c.seed) doc["seed"] = *c.seed;
  if (!c.clock.empty()) doc["clock"] = c.clock;
  if (const char* env = std::getenv("ROADMIND_LLM_URL"); env && *env && !doc.contains("llm_url")) doc["llm_url"] = env;
  if (!c.llm_url.empty()) doc["llm_url"] = c.llm_url;
  if (!c.llm_model.empty()) doc["llm_model"] = c.llm_model;
  return apply_overrides(std::move(doc), c.overrides);
}

ScenarioConfig with_arm(ScenarioConfig config, AgentKind kind) {
  config.mix = KindMix::only(kind);
  return config;
}

fs::path run_dir(const fs::path& out, const RunMetrics& m, std::size_t k) {
  return out / m.scenario / m.arm / fmt::format("run-{}", k);
}

int cmd_run(const Common& common, const std::string& out) {
  nlohmann::json doc = common.config_path.empty() ? nlohmann::json::object() : read_json_file(common.config_path);
  ScenarioConfig base = config_from_json(finish_doc(std::move(doc), common));

  std::vector<RunMetrics> runs;
  for (std::size_t k = 0; k < base.repetitions; ++k) {
    ScenarioConfig config = base;
    config.seed = base.seed + k;
    RunMetrics m = run_scenario(config);
    std::cout << run_line(m) << fmt::format(" schedule={:016x}", m.schedule_hash) << "\n";
    if (!out.empty()) write_run_artifacts(run_dir(out, m, k), m, config.trace_congestion);
    runs.push_back(std::move(m));
  }
  if (runs.size() > 1) {
    auto summary = summarize(runs);
    std::cout << "\n" << wait_journey_table(summary);
    if (!out.empty()) write_atomic(fs::path(out) / base.name / "summary.json", to_json(summary).dump(2) + "\n");
  }
  return kOk;
}

int cmd_compare(const Common& common, std::vector<std::string> configs, std::vector<std::string> densities,
                std::vector<std::string> arms, std::optional<std::size_t> reps, const std::string& out) {
  std::vector<nlohmann::json> docs;
  for (const auto& path : configs) docs.push_back(read_json_file(path));
  for (const auto& level : densities) docs.push_back(density_preset(level));
  if (docs.empty()) {
    docs.push_back(density_preset("low"));
    docs.push_back(density_preset("high"));
  }
  std::vector<AgentKind> kinds;
  for (const auto& a : arms) {
    auto kind = parse_agent_kind(a);
    if (!kind) throw InvalidConfig({fmt::format("arm '{}': expected astar, sequential or concurrent", a)});
    kinds.push_back(*kind);
  }

  std::vector<RunMetrics> runs;
  std::vector<std::string> scenarios;
  for (auto& doc : docs) {
    ScenarioConfig base = config_from_json(finish_doc(std::move(doc), common));
    if (reps) base.repetitions = *reps;
    validate(base);
    scenarios.push_back(base.name);
    for (std::size_t k = 0; k < base.repetitions; ++k) {
      std::optional<std::uint64_t> hash;
      for (auto kind : kinds) {
        ScenarioConfig config = with_arm(base, kind);
        config.seed = base.seed + k;
        RunMetrics m = run_scenario(config);
        if (hash && *hash != m.schedule_hash) {
          std::cerr << fmt::format("warning: {} run {} has a different spawn schedule\n", base.name, k);
        }
        hash = m.schedule_hash;
        std::cout << run_line(m) << fmt::format(" schedule={:016x}", m.schedule_hash) << "\n";
        if (!out.empty()) write_run_artifacts(run_dir(out, m, k), m, config.trace_congestion);
        runs.push_back(std::move(m));
      }
    }
  }

  auto summary = summarize(runs);
  std::string tables = wait_journey_table(summary);
  for (const auto& sc : scenarios) tables += "\n" + sc + "\n" + flow_table(summary, sc);
  std::cout << "\n" << tables;
  if (!out.empty()) {
    write_atomic(fs::path(out) / "comparison.json", to_json(summary).dump(2) + "\n");
    write_atomic(fs::path(out) / "tables.txt", tables);
  }
  return kOk;
}

RoadGraph map_arg(const std::string& path) { return path.empty() ? default_map() : load_map(path); }

int cmd_map_show(const std::string& path) {
  RoadGraph g = map_arg(path);
  std::cout << fmt::format("{} nodes, {} edges, {}\n", g.node_count(), g.edge_count(),
                           g.is_connected() ? "connected" : "NOT connected");
  for (const auto& n : g.nodes()) {
    std::cout << fmt::format("node {:>3} ({:>7.1f}, {:>7.1f}) degree {}", n.id, n.position.x, n.position.y, g.degree(n.id));
    std::cout << (g.degree(n.id) >= kDecisionDegree ? "  decision\n" : "\n");
  }
  for (const auto& e : g.edges()) std::cout << fmt::format("edge {:>3} - {:<3} {:8.2f} m\n", e.u, e.v, e.length);
  return kOk;
}

int cmd_map_validate(const std::string& path) {
  RoadGraph g = map_arg(path);
  if (!g.is_connected()) {
    std::cout << "map is not connected\n";
    return kFailure;
  }
  std::cout << fmt::format("ok: {} nodes, {} edges\n", g.node_count(), g.edge_count());
  return kOk;
}

int cmd_map_export(const std::string& path, const std::string& out) {
  std::string text = map_to_json(map_arg(path)).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
  return kOk;
}

int cmd_probe(const Common& common, NodeId from, NodeId to) {
  ScenarioConfig config = config_from_json(finish_doc(nlohmann::json::object(), common));
  RoadGraph g = default_map();
  if (!g.contains(from) || !g.contains(to)) throw InvalidConfig({"probe nodes must exist on the default map"});
  ChatClient client(config.llm);
  std::cout << fmt::format("POST {}  model={}\n", config.llm.base_url, config.llm.model);
  ChatResult reply = client.complete(build_prompt(g, CongestionSnapshot{}, from, to));
  if (!reply.ok()) {
    std::cout << fmt::format("endpoint error after {:.2f}s: {}\n", reply.seconds, reply.text);
    return kProbeFailed;
  }
  std::cout << fmt::format("reply in {:.2f}s:\n{}\n", reply.seconds, reply.text);
  auto parsed = parse_path_from_text(reply.text);
  if (auto* err = std::get_if<ParseError>(&parsed)) {
    std::cout << "no usable route: " << err->describe() << "\n";
    return kProbeFailed;
  }
  const Path& path = std::get<Path>(parsed);
  PathVerdict verdict = validate_path(g, path, from, to);
  std::cout << "route " << path_to_json(path) << ": " << (verdict.ok() ? "valid" : verdict.describe()) << "\n";
  return verdict.ok() ? kOk : kProbeFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roadmind: traffic simulation with route planning while driving"};
  app.require_subcommand(1);

  Common run_opts;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run one scenario (config.repetitions times, seeds seed..seed+n-1)");
  run->add_option("--config", run_opts.config_path, "Scenario JSON");
  run->add_option("--out", run_out, "Artifact directory");
  add_common(run, run_opts);

  Common cmp_opts;
  std::vector<std::string> cmp_configs, densities;
  std::vector<std::string> arms = {"astar", "sequential", "concurrent"};
  std::optional<std::size_t> reps;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Paired comparison of agent kinds across scenarios");
  compare->add_option("--config", cmp_configs, "Scenario JSON (repeatable)");
  compare->add_option("--density", densities, "Built-in presets: low, high")->delimiter(',');
  compare->add_option("--arms", arms, "Comma-separated agent kinds")->delimiter(',');
  compare->add_option("--reps", reps, "Paired repetitions per scenario");
  compare->add_option("--out", cmp_out, "Artifact directory");
  add_common(compare, cmp_opts);

  std::string map_path, export_out;
  auto* map = app.add_subcommand("map", "Inspect a road map (default grid unless --map)");
  map->require_subcommand(1);
  map->add_option("--map", map_path, "Map JSON");
  auto* map_show = map->add_subcommand("show", "List nodes, degrees and edges");
  auto* map_validate = map->add_subcommand("validate", "Load, check and report connectivity");
  auto* map_export = map->add_subcommand("export", "Write the map as JSON");
  map_export->add_option("--out", export_out, "Output file (stdout if omitted)");

  Common probe_opts;
  NodeId probe_from = 0, probe_to = 11;
  auto* probe = app.add_subcommand("probe-llm", "Ask the configured endpoint for one route and check it");
  probe->add_option("--from", probe_from, "Origin node on the default map");
  probe->add_option("--to", probe_to, "Destination node on the default map");
  add_common(probe, probe_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, run_out);
    if (*compare) return cmd_compare(cmp_opts, cmp_configs, densities, arms, reps, cmp_out);
    if (*map_show) return cmd_map_show(map_path);
    if (*map_validate) return cmd_map_validate(map_path);
    if (*map_export) return cmd_map_export(map_path, export_out);
    if (*probe) return cmd_probe(probe_opts, probe_from, probe_to);
  } catch (const InvalidConfig& e) {
    std::cerr << e.what() << "\n";
    return kBadConfig;
  } catch (const GraphError& e) {
    std::cerr << "map error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "bad JSON: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
