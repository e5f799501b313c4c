#pragma once

// Shortest-path planners against exhaustive enumeration on small random graphs.

#include <sstream>
#include <string>

#include "rmarl/baselines/policies.hpp"
#include "test_util.hpp"

namespace rmarl::testing {

struct OracleResult {
  int checked = 0;
  int mismatches = 0;
  std::string first_failure;
};

// Random assignment of n nodes to min(k, n) non-empty regions.
inline std::vector<RegionId> random_regions(std::mt19937_64& rng, std::size_t n, int k) {
  k = std::min<int>(k, static_cast<int>(n));
  std::vector<RegionId> region(n);
  std::uniform_int_distribution<RegionId> pick(0, k - 1);
  for (std::size_t i = 0; i < n; ++i) region[i] = i < static_cast<std::size_t>(k) ? static_cast<RegionId>(i) : pick(rng);
  std::shuffle(region.begin(), region.end(), rng);
  return region;
}

inline void note_mismatch(OracleResult& r, const std::string& what) {
  if (r.mismatches++ == 0) r.first_failure = what;
}

// static_shortest_path under both weightings versus brute-force DFS.
inline OracleResult check_static_oracle(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  OracleResult out;
  for (int trial = 0; trial < trials; ++trial) {
    const auto net = random_network(rng, 8);
    const NodeId d = static_cast<NodeId>(net.num_nodes() - 1);
    for (PathWeight w : {PathWeight::kDistance, PathWeight::kFreeFlowTime}) {
      const auto r = static_shortest_path(net, 0, d, w);
      const auto b = brute_force_path(net, 0, d, [w](const Edge& e) { return static_weight(e, w); });
      ++out.checked;
      if (r.found != std::isfinite(b.cost) || (r.found && !near_rel(r.cost, b.cost, 1e-12))) {
        note_mismatch(out, "static trial " + std::to_string(trial));
      }
    }
  }
  return out;
}

// intra_region_route under live congestion versus brute-force DFS restricted
// to region-internal edges weighted by current travel times.
inline OracleResult check_intra_oracle(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  OracleResult out;
  for (int trial = 0; trial < trials; ++trial) {
    const auto net = random_network(rng, 8, 0.45);
    const Partition part(net, random_regions(rng, net.num_nodes(), 2));
    std::bernoulli_distribution coin(0.5);
    SimConfig cfg;
    cfg.model = coin(rng) ? CongestionModel::kPaperDef : CongestionModel::kExperiment;
    Simulator sim(net, part, cfg, dynamic_intra_planner());
    // Random vehicles push some edges over capacity.
    if (net.num_edges() > 0) {
      std::uniform_int_distribution<EdgeId> pick(0, static_cast<EdgeId>(net.num_edges()) - 1);
      const int load = std::uniform_int_distribution<int>(0, 30)(rng);
      for (VehicleId v = 0; v < load; ++v) {
        const Edge& e = net.edge(pick(rng));
        sim.place_on_edge(Trip{v, e.from, e.to, 0.0}, e.id, 0.0);
      }
    }
    for (NodeId a = 0; a < static_cast<NodeId>(net.num_nodes()); ++a) {
      for (NodeId b = 0; b < static_cast<NodeId>(net.num_nodes()); ++b) {
        if (part.region_of(a) != part.region_of(b)) continue;
        const RegionId r = part.region_of(a);
        const auto got = intra_region_route(sim, r, a, b);
        const auto want = brute_force_path(
            net, a, b, [&](const Edge& e) { return sim.travel_time(e.id); },
            [&](const Edge& e) { return part.region_of(e.from) == r && part.region_of(e.to) == r; });
        ++out.checked;
        const bool ok = got.found == std::isfinite(want.cost) && (!got.found || near_rel(got.cost, want.cost, 1e-12));
        if (!ok) {
          std::ostringstream s;
          s << "intra trial " << trial << " " << a << " -> " << b;
          note_mismatch(out, s.str());
        }
      }
    }
  }
  return out;
}

}  // namespace rmarl::testing
