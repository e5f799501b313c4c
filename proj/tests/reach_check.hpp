#pragma once

// Reachability-graph properties on random partitioned networks.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "rmarl/reach/reachability.hpp"

namespace rmarl::testing {

inline bool is_acyclic(const RouteGraph& g) {
  std::vector<int> indeg(g.nodes.size(), 0);
  for (const RouteEdge& e : g.edges) ++indeg[static_cast<std::size_t>(g.index_of(e.to))];
  std::vector<int> ready;
  for (std::size_t i = 0; i < indeg.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  }
  const auto out = g.out_lists();
  std::size_t done = 0;
  while (!ready.empty()) {
    const int u = ready.back();
    ready.pop_back();
    ++done;
    for (int ei : out[static_cast<std::size_t>(u)]) {
      const int v = g.index_of(g.edges[static_cast<std::size_t>(ei)].to);
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  return done == g.nodes.size();
}

// Cutting edges of `region` in rg whose tail can be reached from `current`
// using rg edges that stay inside `region`.
inline std::vector<EdgeId> brute_valid(const RoadNetwork& net, const ReachabilityGraph& rg, const Partition& part,
                                       RegionId region, NodeId current) {
  if (region == part.region_of(rg.dest)) return {};
  std::set<NodeId> seen{current};
  for (bool grew = true; grew;) {
    grew = false;
    for (const RouteEdge& e : rg.edges) {
      if (part.region_of(e.from) != region || part.region_of(e.to) != region) continue;
      if (seen.count(e.from) && seen.insert(e.to).second) grew = true;
    }
  }
  std::vector<EdgeId> out;
  for (EdgeId c : part.cutting_edges(region)) {
    if (rg.has_cutting(c) && seen.count(net.edge(c).from)) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct TripCase {
  Fixture f;
  NodeId source;
  NodeId dest;
};

inline std::vector<TripCase> random_trips(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TripCase> out;
  while (static_cast<int>(out.size()) < count) {
    const int regions = std::uniform_int_distribution<int>(3, 6)(rng);
    auto f = random_partitioned_network(rng, regions);
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(f.net.num_nodes()) - 1);
    for (int k = 0; k < 10 && static_cast<int>(out.size()) < count; ++k) {
      const NodeId s = node(rng), d = node(rng);
      if (f.part.region_of(s) == f.part.region_of(d)) continue;
      out.push_back({f, s, d});
    }
  }
  return out;
}

struct ReachResult {
  int trips = 0;
  int failures = 0;
  std::string first_failure;
};

// For every trip: the DAG is acyclic, keeps the connection graph's shortest
// path, and a uniformly random masked rollout reaches the destination region
// without revisiting a region, with valid actions equal to brute force.
inline ReachResult check_reach_trips(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 1);
  ReachResult out;
  auto fail = [&](int trip, const std::string& what) {
    if (out.failures++ == 0) out.first_failure = "trip " + std::to_string(trip) + ": " + what;
  };
  for (const TripCase& t : random_trips(count, seed)) {
    const int id = out.trips++;
    DistanceOracle dist(t.f.net);
    const auto cg = build_connection_graph(t.f.net, t.f.part, dist, t.source, t.dest);
    const auto rg = dag_convert(cg);
    if (!is_acyclic(rg)) {
      fail(id, "cycle survived");
      continue;
    }
    const auto best_cg = route_shortest_path(cg);
    const auto best_rg = route_shortest_path(rg);
    if (!best_rg.found || std::abs(best_rg.weight - best_cg.weight) > 1e-9 * std::max(1.0, best_cg.weight)) {
      fail(id, "shortest path lost");
      continue;
    }
    RegionId region = t.f.part.region_of(t.source);
    NodeId at = t.source;
    std::set<RegionId> visited{region};
    const RegionId goal = t.f.part.region_of(t.dest);
    while (region != goal) {
      const auto acts = valid_actions(rg, t.f.part, region, at);
      if (acts.empty()) {
        fail(id, "dead end in region " + std::to_string(region));
        break;
      }
      if (acts != brute_valid(t.f.net, rg, t.f.part, region, at)) {
        fail(id, "valid actions differ from brute force");
        break;
      }
      const EdgeId pick = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
      at = t.f.net.edge(pick).to;
      region = t.f.part.region_of(at);
      if (!visited.insert(region).second) {
        fail(id, "region " + std::to_string(region) + " revisited");
        break;
      }
    }
  }
  return out;
}

}  // namespace rmarl::testing
