#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "roadmind/network.hpp"

namespace roadmind {

using AgentId = std::uint32_t;

enum class CongestionErrorKind { AlreadyOnEdge, NotOnEdge, UnknownEdge };

class CongestionError : public std::runtime_error {
 public:
  CongestionError(CongestionErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  CongestionErrorKind kind() const noexcept { return kind_; }

 private:
  CongestionErrorKind kind_;
};

struct CongestionEntry {
  NodeId u = 0;
  NodeId v = 0;
  double cf = 1.0;

  friend bool operator==(const CongestionEntry&, const CongestionEntry&) = default;
};

/// Shared view of road conditions at one instant. Entries are sorted by (u, v).
struct CongestionSnapshot {
  double time = 0.0;
  std::vector<CongestionEntry> entries;

  /// Factor for an edge, 1.0 when the edge is not listed.
  double factor(NodeId a, NodeId b) const {
    EdgeKey key = EdgeKey::of(a, b);
    auto it = std::lower_bound(entries.begin(), entries.end(), key,
                               [](const CongestionEntry& e, const EdgeKey& k) { return EdgeKey{e.u, e.v} < k; });
    if (it != entries.end() && it->u == key.u && it->v == key.v) return it->cf;
    return 1.0;
  }

  bool empty() const noexcept { return entries.empty(); }
};

inline constexpr double kDefaultFootprint = 100.0;
inline constexpr double kDefaultReportThreshold = 1.5;

/// Live edge occupancy. CF(e) = 1 + occupants(e) * footprint / length(e).
class CongestionRegistry {
 public:
  explicit CongestionRegistry(std::shared_ptr<const RoadGraph> graph, double footprint = kDefaultFootprint)
      : graph_(std::move(graph)), footprint_(footprint), occupants_(graph_->edge_count()),
        peak_(graph_->edge_count(), 1.0) {}

  const RoadGraph& graph() const noexcept { return *graph_; }
  double footprint() const noexcept { return footprint_; }

  void enter_edge(AgentId agent, EdgeKey edge, double time) {
    std::size_t index = require_edge(edge);
    if (auto it = location_.find(agent); it != location_.end()) {
      const Edge& cur = graph_->edge(it->second);
      throw CongestionError(CongestionErrorKind::AlreadyOnEdge,
                            fmt::format("agent {} entered ({}, {}) while still on ({}, {}) at t={}", agent,
                                        edge.u, edge.v, cur.u, cur.v, time));
    }
    occupants_[index].insert(agent);
    location_.emplace(agent, index);
    peak_[index] = std::max(peak_[index], factor_at(index));
  }

  void exit_edge(AgentId agent, EdgeKey edge, double time) {
    std::size_t index = require_edge(edge);
    auto it = location_.find(agent);
    if (it == location_.end() || it->second != index) {
      throw CongestionError(CongestionErrorKind::NotOnEdge,
                            fmt::format("agent {} exited ({}, {}) without being on it at t={}", agent, edge.u,
                                        edge.v, time));
    }
    occupants_[index].erase(agent);
    location_.erase(it);
  }

  double congestion_factor(EdgeKey edge) const { return factor_at(require_edge(edge)); }

  double congestion_factor(std::size_t edge_index) const { return factor_at(edge_index); }

  std::size_t occupancy(EdgeKey edge) const { return occupants_[require_edge(edge)].size(); }

  const std::set<AgentId>& occupants(EdgeKey edge) const { return occupants_[require_edge(edge)]; }

  std::optional<EdgeKey> edge_of(AgentId agent) const {
    auto it = location_.find(agent);
    if (it == location_.end()) return std::nullopt;
    const Edge& e = graph_->edge(it->second);
    return EdgeKey{e.u, e.v};
  }

  std::size_t total_occupancy() const noexcept { return location_.size(); }

  /// Highest factor currently on any edge.
  double max_factor() const {
    double best = 1.0;
    for (std::size_t i = 0; i < occupants_.size(); ++i) best = std::max(best, factor_at(i));
    return best;
  }

  /// Highest factor each edge has reached since construction.
  const std::vector<double>& peak_factors() const noexcept { return peak_; }

  CongestionSnapshot snapshot(double time, double report_threshold = kDefaultReportThreshold) const {
    CongestionSnapshot snap{time, {}};
    for (std::size_t i = 0; i < occupants_.size(); ++i) {
      double cf = factor_at(i);
      if (cf >= report_threshold) {
        const Edge& e = graph_->edge(i);
        snap.entries.push_back({e.u, e.v, cf});
      }
    }
    // Edge list is sorted by (u, v) at construction, so entries already are.
    return snap;
  }

 private:
  std::size_t require_edge(EdgeKey edge) const {
    auto index = graph_->find_edge(edge);
    if (!index) {
      throw CongestionError(CongestionErrorKind::UnknownEdge, fmt::format("unknown edge ({}, {})", edge.u, edge.v));
    }
    return *index;
  }

  double factor_at(std::size_t index) const {
    return 1.0 + static_cast<double>(occupants_.at(index).size()) * footprint_ / graph_->edge(index).length;
  }

  std::shared_ptr<const RoadGraph> graph_;
  double footprint_;
  std::vector<std::set<AgentId>> occupants_;
  std::unordered_map<AgentId, std::size_t> location_;
  std::vector<double> peak_;
};

/// `[[u, v, cf], ...]` with cf at one decimal; `[]` when nothing is listed.
inline std::string snapshot_to_json(const CongestionSnapshot& snapshot) {
  std::string out = "[";
  for (std::size_t i = 0; i < snapshot.entries.size(); ++i) {
    const auto& e = snapshot.entries[i];
    if (i > 0) out += ", ";
    out += fmt::format("[{}, {}, {:.1f}]", e.u, e.v, e.cf);
  }
  out += "]";
  return out;
}

inline CongestionSnapshot snapshot_from_json(const std::string& text, double time = 0.0) {
  CongestionSnapshot snap{time, {}};
  for (const auto& triple : nlohmann::json::parse(text)) {
    snap.entries.push_back({triple.at(0).get<NodeId>(), triple.at(1).get<NodeId>(), triple.at(2).get<double>()});
  }
  std::sort(snap.entries.begin(), snap.entries.end(),
            [](const CongestionEntry& a, const CongestionEntry& b) { return EdgeKey{a.u, a.v} < EdgeKey{b.u, b.v}; });
  return snap;
}

}  // namespace roadmind
