#pragma once

// Reference computations used by the tests. Deliberately naive: they share
// no code with the library beyond the graph accessors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "roadmind/roadmind.hpp"

namespace oracle {

using roadmind::NodeId;
using roadmind::Path;

inline double congestion_factor(std::size_t occupants, double length, double footprint = 100.0) {
  return 1.0 + static_cast<double>(occupants) * footprint / length;
}

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<Path> optimal;  // every simple path within tolerance of the minimum, sorted
};

/// Exhaustive DFS over simple paths, cost = sum of weight(u, v, length).
inline Best enumerate(const roadmind::RoadGraph& g, NodeId s, NodeId t,
                      const std::function<double(NodeId, NodeId, double)>& weight) {
  std::vector<std::pair<double, Path>> all;
  std::vector<bool> seen(g.node_count(), false);
  Path cur{s};
  seen[s] = true;
  std::function<void(NodeId, double)> dfs = [&](NodeId at, double cost) {
    if (at == t) {
      all.emplace_back(cost, cur);
      return;
    }
    for (const auto& e : g.edges()) {
      NodeId other;
      if (e.u == at) other = e.v;
      else if (e.v == at) other = e.u;
      else continue;
      if (seen[other]) continue;
      seen[other] = true;
      cur.push_back(other);
      dfs(other, cost + weight(at, other, e.length));
      cur.pop_back();
      seen[other] = false;
    }
  };
  dfs(s, 0.0);
  Best best;
  for (const auto& [c, p] : all) best.cost = std::min(best.cost, c);
  for (const auto& [c, p] : all) {
    if (c <= best.cost + 1e-9 * std::max(1.0, best.cost)) best.optimal.push_back(p);
  }
  std::sort(best.optimal.begin(), best.optimal.end());
  return best;
}

inline Best shortest(const roadmind::RoadGraph& g, NodeId s, NodeId t) {
  return enumerate(g, s, t, [](NodeId, NodeId, double len) { return len; });
}

inline Best cheapest(const roadmind::RoadGraph& g, const roadmind::CongestionSnapshot& snap, NodeId s, NodeId t) {
  return enumerate(g, s, t, [&](NodeId a, NodeId b, double len) {
    for (const auto& e : snap.entries) {
      if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) return len * e.cf;
    }
    return len;
  });
}

/// Random snapshot: a few edges with CF drawn from {1.5, 1.6, ..., 5.0}.
inline roadmind::CongestionSnapshot random_snapshot(const roadmind::RoadGraph& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<std::size_t> pick(0, g.edge_count() - 1);
  std::uniform_int_distribution<int> tenths(15, 50);
  std::map<std::pair<NodeId, NodeId>, double> chosen;
  for (int i = 0, n = count(rng); i < n; ++i) {
    const auto& e = g.edge(pick(rng));
    chosen[{e.u, e.v}] = tenths(rng) / 10.0;
  }
  roadmind::CongestionSnapshot snap;
  for (const auto& [k, cf] : chosen) snap.entries.push_back({k.first, k.second, cf});
  return snap;
}

}  // namespace oracle
