#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "rmarl/baselines/policies.hpp"
#include "rmarl/obs/observation.hpp"
#include "test_util.hpp"

namespace rmarl {
namespace {

using testing::Fig4;

// Bellman-Ford distances from `src` over edges inside region `r`.
std::vector<double> region_distance(const RoadNetwork& net, const Partition& part, RegionId r, NodeId src) {
  std::vector<double> d(net.num_nodes(), kInf);
  d[static_cast<std::size_t>(src)] = 0.0;
  for (std::size_t round = 0; round < net.num_nodes(); ++round) {
    for (const Edge& e : net.edges()) {
      if (part.region_of(e.from) != r || part.region_of(e.to) != r) continue;
      auto& to = d[static_cast<std::size_t>(e.to)];
      to = std::min(to, d[static_cast<std::size_t>(e.from)] + e.length);
    }
  }
  return d;
}

struct GridCase {
  GridNetwork grid = generate_grid(GridSpec{});
  Simulator sim{grid.network, grid.partition, SimConfig{}, dynamic_intra_planner()};
  ObservationBuilder obs{grid.network, grid.partition, ObsScales{}};
};

TEST(RoadObservationTest, PaperGridLayout) {
  GridCase c;
  EXPECT_EQ(c.obs.max_actions(), 4);
  EXPECT_EQ(c.obs.request_features(), 12);
  EXPECT_EQ(c.obs.global_size(), 128);
  EXPECT_EQ(c.obs.local_size(), 140);
  for (RegionId r = 0; r < 4; ++r) {
    const auto o = c.obs.road_observation(c.sim, r);
    EXPECT_EQ(o.rows, 4);
    EXPECT_EQ(o.data.size(), 32u);
  }
  EXPECT_EQ(c.obs.global_state(c.sim).size(), 128u);
}

TEST(RoadObservationTest, FreeFlowRowsFollowCuttingEdgeOrder) {
  GridCase c;
  const RoadNetwork& net = c.grid.network;
  for (RegionId r = 0; r < 4; ++r) {
    const auto o = c.obs.raw_road_observation(c.sim, r);
    const auto& cuts = c.grid.partition.cutting_edges(r);
    for (int j = 0; j < o.rows; ++j) {
      const Edge& e = net.edge(cuts[static_cast<std::size_t>(j)]);
      const auto row = o.row(j);
      EXPECT_EQ(row[0], net.node(e.from).x);
      EXPECT_EQ(row[1], net.node(e.from).y);
      EXPECT_EQ(row[2], net.node(e.to).x);
      EXPECT_EQ(row[3], net.node(e.to).y);
      EXPECT_EQ(row[4], e.length);
      EXPECT_DOUBLE_EQ(row[5], e.length / e.max_speed);
      EXPECT_EQ(row[6], 0.0);
      EXPECT_DOUBLE_EQ(row[7], 13.89);
    }
  }
}

TEST(RoadObservationTest, CongestedEdgeTakesTenTimesLonger) {
  GridCase c;
  const EdgeId cut = c.grid.partition.cutting_edges(0)[1];
  const Edge& e = c.grid.network.edge(cut);
  for (VehicleId v = 0; v < 2 * e.capacity; ++v) c.sim.place_on_edge(Trip{v, e.from, e.to, 0.0}, cut, 0.0);
  const auto row = c.obs.raw_road_observation(c.sim, 0).row(1);
  EXPECT_NEAR(row[5], 10.0 * e.length / e.max_speed, 1e-9);
  // The vehicles sit on the edge tail, which lies in region 0, not the head's region.
  EXPECT_EQ(row[6], static_cast<double>(c.sim.region_vehicle_count(c.grid.partition.region_of(e.to))));
  EXPECT_EQ(c.sim.region_vehicle_count(0), 2 * e.capacity);
}

TEST(RoadObservationTest, HeadRegionAggregates) {
  GridCase c;
  // Put a vehicle inside region 1 and check rows pointing into region 1.
  const NodeId inside = c.grid.partition.nodes_in(1)[12];
  const EdgeId e = c.grid.network.out_edges(inside)[0];
  c.sim.place_on_edge(Trip{0, inside, c.grid.network.edge(e).to, 0.0}, e, 0.0);
  const auto o = c.obs.raw_road_observation(c.sim, 0);
  const auto& cuts = c.grid.partition.cutting_edges(0);
  for (int j = 0; j < o.rows; ++j) {
    const RegionId head = c.grid.partition.region_of(c.grid.network.edge(cuts[static_cast<std::size_t>(j)]).to);
    EXPECT_EQ(o.row(j)[6], head == 1 ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(o.row(j)[7], c.sim.region_mean_speed(head));
  }
}

TEST(RequestObservationTest, ZeroTimeAtCutTail) {
  GridCase c;
  const auto& cuts = c.grid.partition.cutting_edges(0);
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const NodeId tail = c.grid.network.edge(cuts[j]).from;
    const auto raw = c.obs.raw_request_observation(c.sim, PlanRequest{0, 0, tail, 99, 0.0});
    EXPECT_EQ(raw[4 + j], 0.0);
  }
}

TEST(RequestObservationTest, FreeFlowMatchesStaticDistances) {
  GridCase c;
  const RoadNetwork& net = c.grid.network;
  const Partition& part = c.grid.partition;
  DistanceOracle dist(net);
  for (RegionId r = 0; r < 4; ++r) {
    for (NodeId cur : part.nodes_in(r)) {
      const NodeId dest = part.nodes_in((r + 2) % 4)[static_cast<std::size_t>(cur) % 25];
      const auto raw = c.obs.raw_request_observation(c.sim, PlanRequest{0, r, cur, dest, 0.0});
      EXPECT_EQ(raw[0], net.node(cur).x);
      EXPECT_EQ(raw[3], net.node(dest).y);
      const auto& cuts = part.cutting_edges(r);
      const auto within = region_distance(net, part, r, cur);
      for (std::size_t j = 0; j < cuts.size(); ++j) {
        const Edge& e = net.edge(cuts[j]);
        const double want = within[static_cast<std::size_t>(e.from)];
        ASSERT_TRUE(testing::near_rel(raw[4 + j], want / 13.89, 1e-9)) << cur << " slot " << j;
        ASSERT_TRUE(testing::near_rel(raw[8 + j], e.length + dist.distance(e.to, dest), 1e-12));
      }
    }
  }
}

TEST(RequestObservationTest, PaddingAndUnreachableSlots) {
  const auto f = testing::fig4();
  const Simulator sim(f.net, f.part, SimConfig{}, dynamic_intra_planner());
  ObservationBuilder obs(f.net, f.part, ObsScales{});
  ASSERT_EQ(obs.max_actions(), 3);
  ASSERT_EQ(f.part.cutting_edges(2).size(), 1u);
  const auto padded = obs.request_observation(sim, PlanRequest{0, 2, Fig4::kV10, Fig4::kS, 0.0});
  ASSERT_EQ(padded.size(), 10u);
  EXPECT_NE(padded[4], kSentinel);
  EXPECT_EQ(padded[5], kSentinel);
  EXPECT_EQ(padded[6], kSentinel);
  EXPECT_NE(padded[7], kSentinel);
  EXPECT_EQ(padded[8], kSentinel);
  EXPECT_EQ(padded[9], kSentinel);

  // Node 1 cannot reach node 0 inside region 0.
  const auto g = testing::build_fixture({{0, 0}, {0, 100}, {100, 50}}, {0, 0, 1}, {{0, 1}, {0, 2}, {1, 2}, {2, 0}});
  const Simulator s2(g.net, g.part, SimConfig{}, dynamic_intra_planner());
  ObservationBuilder o2(g.net, g.part, ObsScales{});
  const auto raw = o2.raw_request_observation(s2, PlanRequest{0, 0, 1, 2, 0.0});
  const auto& cuts = g.part.cutting_edges(0);
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const NodeId tail = g.net.edge(cuts[j]).from;
    EXPECT_EQ(raw[4 + j], tail == 0 ? kSentinel : 0.0);
  }
}

TEST(RequestObservationTest, WrongRegionThrows) {
  GridCase c;
  EXPECT_THROW(c.obs.request_observation(c.sim, PlanRequest{0, 1, 0, 99, 0.0}), std::invalid_argument);
}

TEST(StateTest, LocalStateIsExactConcatenation) {
  GridCase c;
  const auto g = c.obs.global_state(c.sim);
  const auto q = c.obs.request_observation(c.sim, PlanRequest{0, 0, 0, 99, 0.0});
  const auto l = c.obs.local_state(g, q);
  ASSERT_EQ(l.size(), 140u);
  EXPECT_TRUE(std::equal(g.begin(), g.end(), l.begin()));
  EXPECT_TRUE(std::equal(q.begin(), q.end(), l.begin() + 128));
  EXPECT_THROW(c.obs.local_state(q, g), std::invalid_argument);
  // Global order is global cutting-edge order.
  const EdgeId first = c.grid.partition.all_cutting_edges()[0];
  const RegionId owner = c.grid.partition.region_of(c.grid.network.edge(first).from);
  const auto& own = c.grid.partition.cutting_edges(owner);
  const auto pos = std::find(own.begin(), own.end(), first) - own.begin();
  const auto row = c.obs.road_observation(c.sim, owner).row(static_cast<int>(pos));
  EXPECT_TRUE(std::equal(row.begin(), row.end(), g.begin()));
}

// Drives a congested episode and checks bounds and determinism of every observation.
std::vector<std::vector<double>> observed_episode(std::uint64_t seed, bool* bounded) {
  const auto grid = generate_grid(GridSpec{});
  SimConfig cfg;
  cfg.episode_len = 120;
  Simulator sim(grid.network, grid.partition, cfg, dynamic_intra_planner());
  InjectionSpec inj;
  inj.vehicles_per_second = 3.0;
  inj.max_vehicles = 150;
  sim.set_injector(Injector(inj, OdSampler::region_to_region(grid.partition, 0, 3), seed));
  ObservationBuilder obs(grid.network, grid.partition, ObsScales{120.0, 150.0});
  DistanceOracle dist(grid.network);
  std::vector<std::vector<double>> trace;
  *bounded = true;
  auto check = [&](const std::vector<double>& v) {
    for (double x : v) *bounded &= x >= -1.0 && x <= 1.0;
  };
  while (!sim.done()) {
    const auto reqs = sim.begin_step();
    trace.push_back(obs.global_state(sim));
    check(trace.back());
    for (const PlanRequest& r : reqs) {
      trace.push_back(obs.request_observation(sim, r));
      check(trace.back());
      check(obs.road_observation(sim, r.region).data);
      sim.assign(r.vehicle, sp_action(grid.network, grid.partition, dist, r.current_node, r.dest_node));
    }
    sim.finish_step();
  }
  return trace;
}

TEST(StateTest, NormalisedBoundsAndDeterminism) {
  bool bounded_a = false, bounded_b = false;
  const auto a = observed_episode(4, &bounded_a);
  const auto b = observed_episode(4, &bounded_b);
  EXPECT_TRUE(bounded_a);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.size(), 200u);
}

}  // namespace
}  // namespace rmarl
