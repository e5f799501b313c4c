#pragma once

// Q-routing convergence on a small static network.

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "rmarl/train/runner.hpp"

namespace rmarl::testing {

// Eight nodes: a 2 x 4 grid of two-way streets plus one diagonal shortcut.
// Capacity is high enough that travel times never change.
inline Fixture qrouting_network() {
  const std::vector<std::pair<double, double>> xy = {{0, 0},   {100, 0},   {200, 0},   {300, 0},
                                                     {0, 120}, {100, 120}, {200, 120}, {300, 120}};
  std::vector<std::pair<NodeId, NodeId>> links;
  auto both = [&](NodeId a, NodeId b) {
    links.emplace_back(a, b);
    links.emplace_back(b, a);
  };
  for (NodeId i = 0; i < 3; ++i) {
    both(i, i + 1);
    both(i + 4, i + 5);
  }
  for (NodeId i = 0; i < 4; ++i) both(i, i + 4);
  both(1, 6);
  return build_fixture(xy, std::vector<RegionId>(8, 0), links, 10.0, 1000);
}

struct QRoutingResult {
  double max_rel_error = 0.0;  // over all (x, d), x != d
  int episodes = 0;
};

// Trains a Q-router for `episodes` episodes with annealed exploration and
// compares min_y Q_x(d, y) against free-flow shortest travel times.
inline QRoutingResult check_qrouting(int episodes, std::uint64_t seed) {
  const Fixture f = qrouting_network();
  Scenario sc;
  sc.net = &f.net;
  sc.part = &f.part;
  sc.sim.episode_len = 200;
  sc.injection.vehicles_per_second = 1.0;
  sc.injection.max_vehicles = 20;
  sc.injection.reinject = true;
  sc.sampler = OdSampler::uniform(f.net);

  QRouter router(0.5, seed);
  for (int ep = 0; ep < episodes; ++ep) {
    router.set_epsilon(annealed_epsilon(ep, episodes));
    run_qrouting_episode(sc, router, seed * 1000 + static_cast<std::uint64_t>(ep));
  }
  QRoutingResult out;
  out.episodes = episodes;
  for (NodeId d = 0; d < 8; ++d) {
    const auto truth = distances_to(f.net, d, [&](EdgeId e) { return f.net.edge(e).free_flow_time(); });
    for (NodeId x = 0; x < 8; ++x) {
      if (x == d) continue;
      const double q = router.table().min_q(f.net, x, d);
      const double t = truth[static_cast<std::size_t>(x)];
      out.max_rel_error = std::max(out.max_rel_error, std::abs(q - t) / t);
    }
  }
  return out;
}

}  // namespace rmarl::testing
