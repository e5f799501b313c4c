#pragma once

// Shared hand-built networks.

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "rmarl/graph/partition.hpp"

namespace rmarl::testing {

struct Fixture {
  RoadNetwork net;
  Partition part;

  EdgeId edge(NodeId a, NodeId b) const {
    const EdgeId e = net.find_edge(a, b);
    if (e == kNoEdge) throw std::logic_error("fixture has no such edge");
    return e;
  }
};

inline Fixture build_fixture(const std::vector<std::pair<double, double>>& xy, const std::vector<RegionId>& region,
                             const std::vector<std::pair<NodeId, NodeId>>& links, double vmax = 13.89,
                             int capacity = 10) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < xy.size(); ++i) nodes.push_back(Node{static_cast<NodeId>(i), xy[i].first, xy[i].second});
  std::vector<Edge> edges;
  for (const auto& [a, b] : links) {
    const double len = std::hypot(xy[static_cast<std::size_t>(a)].first - xy[static_cast<std::size_t>(b)].first,
                                  xy[static_cast<std::size_t>(a)].second - xy[static_cast<std::size_t>(b)].second);
    edges.push_back(Edge{static_cast<EdgeId>(edges.size()), a, b, len, vmax, capacity});
  }
  Fixture f{RoadNetwork(std::move(nodes), std::move(edges)), {}};
  f.part = Partition(f.net, region);
  return f;
}

// Three-region example: source region R1 = {s, v1, v2, v3}, transit region
// R2 = {v4..v8}, destination region R3 = {v9, v10, d}. Node ids: s = 0,
// v1..v10 = 1..10, d = 11. The cheapest trip s -> d runs s v1 v4 v6 v9 d.
enum Fig4 : NodeId { kS = 0, kV1, kV2, kV3, kV4, kV5, kV6, kV7, kV8, kV9, kV10, kD };

inline Fixture fig4() {
  const std::vector<std::pair<double, double>> xy = {
      {0, 100},   {100, 150}, {100, 100}, {100, 40},  {200, 150}, {200, 50},
      {300, 150}, {300, 50},  {200, 100}, {400, 150}, {400, 50},  {500, 100}};
  const std::vector<RegionId> region = {0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2};
  std::vector<std::pair<NodeId, NodeId>> links;
  auto both = [&](NodeId a, NodeId b) {
    links.emplace_back(a, b);
    links.emplace_back(b, a);
  };
  both(kS, kV1);
  both(kS, kV2);
  both(kS, kV3);
  both(kV4, kV8);
  both(kV8, kV5);
  both(kV4, kV6);
  both(kV5, kV7);
  both(kV6, kV7);
  both(kV9, kD);
  both(kV10, kD);
  both(kV9, kV10);
  for (auto [a, b] : {std::pair{kV1, kV4}, {kV3, kV5}, {kV2, kV8}, {kV4, kV1}, {kV6, kV9}, {kV7, kV10}, {kV9, kV6}}) {
    links.emplace_back(a, b);
  }
  return build_fixture(xy, region, links);
}

// Random strongly connected road network: a jittered rows x cols grid with
// two-way streets, some of which are dropped to one-way, partitioned into
// `regions` connected regions.
inline Fixture random_partitioned_network(std::mt19937_64& rng, int regions) {
  std::uniform_int_distribution<int> side(4, 7);
  const int rows = side(rng), cols = side(rng);
  std::uniform_real_distribution<double> jitter(-20.0, 20.0);
  std::vector<std::pair<double, double>> xy;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) xy.emplace_back(100.0 * c + jitter(rng), 100.0 * r + jitter(rng));
  }
  std::bernoulli_distribution one_way(0.15);
  std::vector<std::pair<NodeId, NodeId>> links;
  auto id = [&](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // Border streets stay two-way so the network stays strongly connected.
      const bool border_row = r == 0 || r == rows - 1;
      const bool border_col = c == 0 || c == cols - 1;
      if (c + 1 < cols) {
        links.emplace_back(id(r, c), id(r, c + 1));
        if (border_row || !one_way(rng)) links.emplace_back(id(r, c + 1), id(r, c));
      }
      if (r + 1 < rows) {
        links.emplace_back(id(r + 1, c), id(r, c));
        if (border_col || !one_way(rng)) links.emplace_back(id(r, c), id(r + 1, c));
      }
    }
  }
  Fixture f = build_fixture(xy, std::vector<RegionId>(xy.size(), 0), links);
  f.part = partition_network(f.net, regions, rng());
  return f;
}

}  // namespace rmarl::testing
