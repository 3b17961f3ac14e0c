#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "roadmind/simulation.hpp"

namespace roadmind {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Sample standard deviation; zero for a single value. Works on offsets
/// from the first value, so identical inputs give exactly zero spread.
inline MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    double d = v - values.front();
    sum += d;
    sq += d * d;
  }
  out.mean = values.front() + sum / n;
  if (values.size() > 1) out.std = std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1.0)));
  return out;
}

struct SummaryRow {
  std::string scenario;
  std::string arm;
  std::size_t runs = 0;
  MeanStd avg_journey_time;
  MeanStd avg_wait_time;
  MeanStd max_congestion;
  MeanStd avg_reroute_count;
  MeanStd pre_arrival_rate;
  std::size_t failed_agents = 0;
};

struct ComparisonSummary {
  std::vector<SummaryRow> rows;

  const SummaryRow* find(const std::string& scenario, const std::string& arm) const {
    for (const auto& r : rows) {
      if (r.scenario == scenario && r.arm == arm) return &r;
    }
    return nullptr;
  }
};

inline int arm_rank(const std::string& arm) {
  if (arm == "astar") return 0;
  if (arm == "sequential") return 1;
  if (arm == "concurrent") return 2;
  return 3;
}

/// Per (scenario, arm): mean and spread of each run-level aggregate.
/// Rows are ordered by scenario name, then astar, sequential, concurrent.
inline ComparisonSummary summarize(const std::vector<RunMetrics>& runs) {
  std::map<std::pair<std::string, std::string>, std::vector<const RunMetrics*>> groups;
  for (const auto& r : runs) groups[{r.scenario, r.arm}].push_back(&r);

  ComparisonSummary summary;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.scenario = key.first;
    row.arm = key.second;
    row.runs = members.size();
    auto collect = [&](auto field) {
      std::vector<double> v;
      for (const auto* m : members) v.push_back(field(*m));
      return mean_std(v);
    };
    row.avg_journey_time = collect([](const RunMetrics& m) { return m.avg_journey_time; });
    row.avg_wait_time = collect([](const RunMetrics& m) { return m.avg_wait_time; });
    row.max_congestion = collect([](const RunMetrics& m) { return m.max_congestion; });
    row.avg_reroute_count = collect([](const RunMetrics& m) { return m.avg_reroute_count; });
    row.pre_arrival_rate = collect([](const RunMetrics& m) { return m.pre_arrival_rate; });
    for (const auto* m : members) row.failed_agents += m->failed;
    summary.rows.push_back(row);
  }
  std::stable_sort(summary.rows.begin(), summary.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    return arm_rank(a.arm) < arm_rank(b.arm);
  });
  return summary;
}

inline nlohmann::json to_json(const MeanStd& v) { return {{"mean", v.mean}, {"std", v.std}}; }

inline nlohmann::json to_json(const ComparisonSummary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : summary.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"arm", r.arm},
                    {"runs", r.runs},
                    {"avg_journey_time", to_json(r.avg_journey_time)},
                    {"avg_wait_time", to_json(r.avg_wait_time)},
                    {"max_congestion", to_json(r.max_congestion)},
                    {"avg_reroute_count", to_json(r.avg_reroute_count)},
                    {"pre_arrival_rate", to_json(r.pre_arrival_rate)},
                    {"failed_agents", r.failed_agents}});
  }
  return {{"rows", rows}};
}

inline nlohmann::json to_json(const ManagerStats& s) {
  return {{"submitted", s.submitted}, {"completed", s.completed},   {"timed_out", s.timed_out},
          {"cancelled", s.cancelled}, {"rejected", s.rejected},     {"stale_dropped", s.stale_dropped},
          {"queued", s.queued},       {"in_flight", s.in_flight},   {"cancel_noops", s.cancel_noops}};
}

inline nlohmann::json run_summary_json(const RunMetrics& m) {
  return {{"scenario", m.scenario},
          {"arm", m.arm},
          {"seed", m.seed},
          {"schedule_hash", fmt::format("{:016x}", m.schedule_hash)},
          {"agents", m.agents.size()},
          {"arrived", m.arrived},
          {"failed", m.failed},
          {"avg_journey_time", m.avg_journey_time},
          {"avg_wait_time", m.avg_wait_time},
          {"max_congestion", m.max_congestion},
          {"mean_peak_congestion", m.mean_peak_congestion},
          {"avg_reroute_count", m.avg_reroute_count},
          {"pre_arrival_rate", m.pre_arrival_rate},
          {"concurrent_requests", m.concurrent_requests},
          {"end_time", m.end_time},
          {"ticks", m.ticks},
          {"manager", to_json(m.manager)},
          {"unresolved_handles", m.unresolved_handles},
          {"waiting_at_end", m.waiting_at_end},
          {"stale_deliveries", m.stale_deliveries},
          {"conservation_violations", m.conservation_violations}};
}

inline std::string route_text(const Path& route) {
  std::string out;
  for (std::size_t i = 0; i < route.size(); ++i) out += fmt::format("{}{}", i ? " " : "", route[i]);
  return out;
}

inline std::string journeys_csv(const RunMetrics& m) {
  std::string out = "agent_id,kind,spawn,arrival,journey_s,wait_s,reroutes,route\n";
  for (const auto& a : m.agents) {
    if (!a.spawned) {
      out += fmt::format("{},{},,,,,,\n", a.id, to_string(a.kind));
      continue;
    }
    auto journey = a.stats.journey_time();
    out += fmt::format("{},{},{:.3f},{},{},{:.3f},{},{}\n", a.id, to_string(a.kind), a.stats.spawn_time,
                       a.stats.arrival_time ? fmt::format("{:.3f}", *a.stats.arrival_time) : "",
                       journey ? fmt::format("{:.3f}", *journey) : "", a.stats.wait_time, a.stats.reroute_count,
                       route_text(a.stats.route_taken));
  }
  return out;
}

inline std::string requests_csv(const RunMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : std::string(); };
  auto resolution = [](Resolution r) {
    switch (r) {
      case Resolution::Pending: return "pending";
      case Resolution::Applied: return "applied";
      case Resolution::Discarded: return "discarded";
      case Resolution::Cancelled: return "cancelled";
    }
    return "?";
  };
  std::string out = "agent_id,request_id,reason,origin,issued_at,resolved_at,reached_origin_at,wait_s,resolution,rerouted\n";
  for (const auto& a : m.agents) {
    for (const auto& r : a.stats.requests) {
      out += fmt::format("{},{},{},{},{:.3f},{},{},{:.3f},{},{}\n", a.id, r.request_id, to_string(r.reason), r.origin,
                         r.issued_at, opt(r.resolved_at), opt(r.reached_origin_at), r.wait, resolution(r.resolution),
                         r.rerouted ? 1 : 0);
    }
  }
  return out;
}

inline std::string congestion_csv(const RunMetrics& m) {
  std::string out = "time,u,v,occupancy,cf\n";
  for (const auto& s : m.trace) out += fmt::format("{:.3f},{},{},{},{:.4f}\n", s.time, s.u, s.v, s.occupancy, s.cf);
  return out;
}

/// Writes through a sibling temp file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::ios_base::failure("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Lays out one run as <dir>/{journeys.csv, requests.csv, summary.json[, congestion.csv]}.
inline void write_run_artifacts(const std::filesystem::path& dir, const RunMetrics& m, bool with_trace) {
  write_atomic(dir / "journeys.csv", journeys_csv(m));
  write_atomic(dir / "requests.csv", requests_csv(m));
  write_atomic(dir / "summary.json", run_summary_json(m).dump(2) + "\n");
  if (with_trace) write_atomic(dir / "congestion.csv", congestion_csv(m));
}

inline std::string run_line(const RunMetrics& m) {
  return fmt::format("{} {} seed={} arrived={}/{} journey={:.2f}s wait={:.2f}s max_cf={:.2f} reroutes={:.2f} pre_arrival={:.2f}",
                     m.scenario, m.arm, m.seed, m.arrived, m.agents.size(), m.avg_journey_time, m.avg_wait_time,
                     m.max_congestion, m.avg_reroute_count, m.pre_arrival_rate);
}

/// Wait and journey per scenario, one row per arm.
inline std::string wait_journey_table(const ComparisonSummary& s) {
  std::vector<std::string> scenarios;
  std::vector<std::string> arms;
  for (const auto& r : s.rows) {
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end()) scenarios.push_back(r.scenario);
    if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
  }
  std::stable_sort(arms.begin(), arms.end(), [](const auto& a, const auto& b) { return arm_rank(a) < arm_rank(b); });
  std::string out = fmt::format("{:<12}", "method");
  for (const auto& sc : scenarios) out += fmt::format(" | {:>18} {:>18}", sc + " wait(s)", sc + " journey(s)");
  out += "\n";
  for (const auto& arm : arms) {
    out += fmt::format("{:<12}", arm);
    for (const auto& sc : scenarios) {
      if (const auto* r = s.find(sc, arm)) {
        out += fmt::format(" | {:>18.2f} {:>18.2f}", r->avg_wait_time.mean, r->avg_journey_time.mean);
      } else {
        out += fmt::format(" | {:>18} {:>18}", "-", "-");
      }
    }
    out += "\n";
  }
  return out;
}

/// Journey, peak congestion and reroutes for one scenario.
inline std::string flow_table(const ComparisonSummary& s, const std::string& scenario) {
  std::string out = fmt::format("{:<12} | {:>14} | {:>9} | {:>13} | {:>11}\n", "method", "avg journey(s)", "max cong.",
                                "reroute freq.", "pre-arrival");
  for (const auto& r : s.rows) {
    if (r.scenario != scenario) continue;
    out += fmt::format("{:<12} | {:>14.2f} | {:>9.2f} | {:>13.2f} | {:>11.2f}\n", r.arm, r.avg_journey_time.mean,
                       r.max_congestion.mean, r.avg_reroute_count.mean, r.pre_arrival_rate.mean);
  }
  return out;
}

}  // namespace roadmind
