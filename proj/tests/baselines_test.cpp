#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "oracle_check.hpp"
#include "qrouting_check.hpp"
#include "rmarl/baselines/policies.hpp"
#include "rmarl/reach/reachability.hpp"

namespace rmarl {
namespace {

using testing::Fig4;

Simulator free_sim(const testing::Fixture& f) { return Simulator(f.net, f.part, SimConfig{}, dynamic_intra_planner()); }

// Parks `n` vehicles at the tail of edge `e`.
void congest(Simulator& sim, EdgeId e, int n) {
  const Edge& ed = sim.network().edge(e);
  for (int i = 0; i < n; ++i) {
    sim.place_on_edge(Trip{static_cast<VehicleId>(sim.vehicles().size()), ed.from, ed.to, 0.0}, e, 0.0);
  }
}

TEST(IntraRegionRouteTest, MatchesExhaustiveSearch) {
  const auto r = testing::check_intra_oracle(200, 41);
  EXPECT_GT(r.checked, 1000);
  EXPECT_EQ(r.mismatches, 0) << r.first_failure;
}

TEST(IntraRegionRouteTest, TrivialAndForeignEndpoints) {
  const auto f = testing::fig4();
  const auto sim = free_sim(f);
  const auto same = intra_region_route(sim, 1, Fig4::kV4, Fig4::kV4);
  ASSERT_TRUE(same.found);
  EXPECT_EQ(same.nodes, std::vector<NodeId>{Fig4::kV4});
  EXPECT_THROW(intra_region_route(sim, 1, Fig4::kV4, Fig4::kV9), std::invalid_argument);
}

TEST(IntraRegionRouteTest, FreeFlowEqualsStaticShortestPath) {
  const auto grid = generate_grid(GridSpec{1, 5, 100.0, 13.89, 10});
  const Simulator sim(grid.network, grid.partition, SimConfig{}, dynamic_intra_planner());
  for (NodeId a : {0, 7, 12}) {
    for (NodeId b : {24, 3, 18}) {
      const auto dyn = intra_region_route(sim, 0, a, b);
      const auto stat = static_shortest_path(grid.network, a, b, PathWeight::kFreeFlowTime);
      EXPECT_EQ(dyn.nodes, stat.nodes);
      EXPECT_DOUBLE_EQ(dyn.cost, stat.cost);
    }
  }
}

// a -> b directly (100 m) or around through c with a total of `detour` meters.
testing::Fixture detour_fixture(double detour) {
  const double h = std::sqrt(std::max(0.0, detour * detour / 4.0 - 50.0 * 50.0));
  return testing::build_fixture({{0, 0}, {100, 0}, {50, h}}, {0, 0, 0}, {{0, 1}, {0, 2}, {2, 1}});
}

TEST(IntraRegionRouteTest, CongestedEdgeDetoursOnlyWhenCheaper) {
  for (double detour : {120.0, 1100.0}) {
    const auto f = detour_fixture(detour);
    auto sim = free_sim(f);
    EXPECT_EQ(intra_region_route(sim, 0, 0, 1).nodes, (std::vector<NodeId>{0, 1}));
    congest(sim, f.edge(0, 1), 20);  // 10x travel time on the direct edge
    const double direct = sim.travel_time(f.edge(0, 1));
    const double around = sim.travel_time(f.edge(0, 2)) + sim.travel_time(f.edge(2, 1));
    const auto route = intra_region_route(sim, 0, 0, 1);
    if (around < direct) {
      EXPECT_EQ(route.nodes, (std::vector<NodeId>{0, 2, 1})) << detour;
    } else {
      EXPECT_EQ(route.nodes, (std::vector<NodeId>{0, 1})) << detour;
    }
  }
}

TEST(RandomPolicyTest, UniformOverCandidates) {
  RandomPolicy policy(9, true);
  const std::vector<EdgeId> cands{3, 8, 11, 20};
  std::map<EdgeId, int> hits;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++hits[policy.pick(cands)];
  ASSERT_EQ(hits.size(), 4u);
  for (const auto& [e, n] : hits) EXPECT_NEAR(static_cast<double>(n) / draws, 0.25, 0.01) << e;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(policy.pick({5}), 5);
  EXPECT_THROW(policy.pick({}), std::invalid_argument);
}

TEST(RandomPolicyTest, MaskedRespectsValidSetUnmaskedUsesAllCuts) {
  const auto f = testing::fig4();
  const auto sim = free_sim(f);
  const std::vector<PlanRequest> reqs(50, PlanRequest{0, 1, Fig4::kV4, Fig4::kD, 0.0});
  const std::vector<EdgeId> valid{f.edge(Fig4::kV6, Fig4::kV9)};
  const std::vector<std::vector<EdgeId>> masks(reqs.size(), valid);
  RandomPolicy masked(1, true);
  for (EdgeId e : masked.decide(sim, 1, reqs, masks)) EXPECT_EQ(e, valid[0]);

  RandomPolicy open(1, false);
  std::set<EdgeId> seen;
  for (EdgeId e : open.decide(sim, 1, reqs, masks)) seen.insert(e);
  const auto& cuts = f.part.cutting_edges(1);
  EXPECT_EQ(seen, std::set<EdgeId>(cuts.begin(), cuts.end()));
  EXPECT_EQ(masked.name(), "random_masked");
  EXPECT_EQ(open.name(), "random");
}

TEST(ShortestPathPolicyTest, Fig4PicksFirstCutOfStaticPath) {
  const auto f = testing::fig4();
  DistanceOracle dist(f.net);
  EXPECT_EQ(sp_action(f.net, f.part, dist, Fig4::kS, Fig4::kD), f.edge(Fig4::kV1, Fig4::kV4));
  EXPECT_EQ(sp_action(f.net, f.part, dist, Fig4::kV4, Fig4::kD), f.edge(Fig4::kV6, Fig4::kV9));
  EXPECT_EQ(sp_action(f.net, f.part, dist, Fig4::kV9, Fig4::kD), kNoEdge);
  const auto one_way = testing::build_fixture({{0, 0}, {100, 0}}, {0, 1}, {{0, 1}});
  DistanceOracle d2(one_way.net);
  EXPECT_THROW(sp_action(one_way.net, one_way.part, d2, 1, 0), NoPathError);
}

TEST(ShortestPathPolicyTest, MatchesBruteForceFirstExit) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = testing::random_network(rng, 8, 0.4);
    const Partition part(net, testing::random_regions(rng, net.num_nodes(), 3));
    DistanceOracle dist(net);
    for (NodeId a = 0; a < static_cast<NodeId>(net.num_nodes()); ++a) {
      for (NodeId b = 0; b < static_cast<NodeId>(net.num_nodes()); ++b) {
        if (part.region_of(a) == part.region_of(b)) continue;
        const auto brute = testing::brute_force_path(net, a, b, [](const Edge& e) { return e.length; });
        if (!std::isfinite(brute.cost)) {
          EXPECT_THROW(sp_action(net, part, dist, a, b), NoPathError);
          continue;
        }
        EdgeId exit = kNoEdge;
        for (std::size_t i = 0; i + 1 < brute.nodes.size() && exit == kNoEdge; ++i) {
          if (part.region_of(brute.nodes[i + 1]) != part.region_of(a)) {
            exit = net.find_edge(brute.nodes[i], brute.nodes[i + 1]);
          }
        }
        ASSERT_EQ(sp_action(net, part, dist, a, b), exit) << "trial " << trial;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(DynamicShortestPathPolicyTest, FreeFlowMatchesStatic) {
  const auto grid = generate_grid(GridSpec{});
  const Simulator sim(grid.network, grid.partition, SimConfig{}, dynamic_intra_planner());
  DistanceOracle dist(grid.network);
  for (NodeId a = 0; a < 100; a += 3) {
    for (NodeId b = 1; b < 100; b += 7) {
      ASSERT_EQ(spfr_action(sim, a, b), sp_action(grid.network, grid.partition, dist, a, b)) << a << " " << b;
    }
  }
}

TEST(DynamicShortestPathPolicyTest, AvoidsCongestedOwnRegionEdge) {
  const auto f = testing::fig4();
  auto sim = free_sim(f);
  EXPECT_EQ(spfr_action(sim, Fig4::kS, Fig4::kD), f.edge(Fig4::kV1, Fig4::kV4));
  congest(sim, f.edge(Fig4::kS, Fig4::kV1), 10);  // at capacity: no slowdown yet
  EXPECT_EQ(spfr_action(sim, Fig4::kS, Fig4::kD), f.edge(Fig4::kV1, Fig4::kV4));
  congest(sim, f.edge(Fig4::kS, Fig4::kV1), 10);
  // Alternatives: via v3 -> v5 (116.6 + 100.5 + 300 + 111.8 m) or v2 -> v8; both beat 10x on s -> v1.
  const EdgeId pick = spfr_action(sim, Fig4::kS, Fig4::kD);
  EXPECT_NE(pick, f.edge(Fig4::kV1, Fig4::kV4));
  EXPECT_EQ(pick, spfr_action(sim, Fig4::kS, Fig4::kD));
  EXPECT_EQ(pick, f.edge(Fig4::kV3, Fig4::kV5));
}

TEST(QTableTest, UpdateExamples) {
  QTable full(1.0);
  full.update(0, 5, 1, 10.0, 50.0);
  EXPECT_DOUBLE_EQ(full.q(0, 5, 1), 60.0);
  QTable half(0.5);
  half.update(0, 5, 1, 10.0, 50.0);
  half.update(0, 5, 1, 10.0, 50.0);
  EXPECT_DOUBLE_EQ(half.q(0, 5, 1), 45.0);

  QTable frozen(0.0);
  for (int i = 0; i < 10; ++i) frozen.update(i, 7, i + 1, 3.0 * i, 11.0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(frozen.q(i, 7, i + 1), 0.0);
}

TEST(QTableTest, SelectAndSerialize) {
  const auto f = testing::qrouting_network();
  QTable t(0.5);
  t.update(1, 7, 0, 5.0, 0.0);
  t.update(1, 7, 2, 1.0, 0.0);
  t.update(1, 7, 5, 9.0, 0.0);
  t.update(1, 7, 6, 4.0, 0.0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(f.net.edge(t.select(f.net, 1, 7, 0.0, rng)).to, 2);
  EXPECT_DOUBLE_EQ(t.min_q(f.net, 1, 7), 0.5);
  EXPECT_DOUBLE_EQ(t.min_q(f.net, 7, 7), 0.0);
  const QTable back = QTable::deserialize(t.serialize());
  EXPECT_EQ(back.serialize(), t.serialize());
  EXPECT_DOUBLE_EQ(back.q(1, 7, 6), 2.0);
  EXPECT_THROW(QTable::deserialize(t.serialize().substr(0, 20)), std::runtime_error);
}

TEST(QTableTest, AnnealedEpsilon) {
  EXPECT_DOUBLE_EQ(annealed_epsilon(0, 11), 0.5);
  EXPECT_DOUBLE_EQ(annealed_epsilon(10, 11), 0.05);
  EXPECT_NEAR(annealed_epsilon(5, 11), 0.275, 1e-12);
}

TEST(QRoutingTest, ConvergesToShortestTravelTimes) {
  const auto r = testing::check_qrouting(500, 3);
  EXPECT_LT(r.max_rel_error, 0.01);
}

}  // namespace
}  // namespace rmarl
