#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rmarl/graph/partition.hpp"
#include "rmarl/graph/shortest_path.hpp"
#include "rmarl/sim/simulator.hpp"

namespace rmarl {

/// Cheapest path inside `region` under current travel times. Only edges with
/// both endpoints in the region are used.
PathResult intra_region_route(const Simulator& sim, RegionId region, NodeId from, NodeId to);

/// IntraPlanner wrapping intra_region_route.
IntraPlanner dynamic_intra_planner();

/// First edge on `path` whose head lies outside the region of path.front(), or kNoEdge.
EdgeId first_region_exit(const RoadNetwork& net, const Partition& part, const std::vector<NodeId>& path);

/// Cutting edge through which the static (distance) shortest path from
/// `current` to `dest` leaves the current region. kNoEdge when dest is in the
/// current region. Throws NoPathError when dest is unreachable.
EdgeId sp_action(const RoadNetwork& net, const Partition& part, DistanceOracle& dist, NodeId current, NodeId dest);

/// Like sp_action under observable travel times: exact on edges leaving nodes
/// of the current region, length / mean effective speed of the tail's region elsewhere.
EdgeId spfr_action(const Simulator& sim, NodeId current, NodeId dest);

/// Inter-region routing policy: picks one cutting edge per plan request.
/// `valid` holds the reachability-masked action set of each request.
class RoutingPolicy {
 public:
  virtual ~RoutingPolicy() = default;
  virtual std::string name() const = 0;
  virtual std::vector<EdgeId> decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                                     std::span<const std::vector<EdgeId>> valid) = 0;
  /// Called with every step's events (learning policies hook in here).
  virtual void observe(const Simulator&, std::span<const SimEvent>) {}
};

class ShortestPathPolicy : public RoutingPolicy {
 public:
  explicit ShortestPathPolicy(const RoadNetwork& net) : dist_(net) {}
  std::string name() const override { return "sp"; }
  std::vector<EdgeId> decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                             std::span<const std::vector<EdgeId>> valid) override;

 private:
  DistanceOracle dist_;
};

class DynamicShortestPathPolicy : public RoutingPolicy {
 public:
  std::string name() const override { return "spfr"; }
  std::vector<EdgeId> decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                             std::span<const std::vector<EdgeId>> valid) override;
};

/// Uniform choice among the region's cutting edges, or among the masked set
/// when `masked` is true.
class RandomPolicy : public RoutingPolicy {
 public:
  RandomPolicy(std::uint64_t seed, bool masked) : rng_(seed), masked_(masked) {}
  std::string name() const override { return masked_ ? "random_masked" : "random"; }
  std::vector<EdgeId> decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                             std::span<const std::vector<EdgeId>> valid) override;
  /// Uniform pick from a candidate list (throws on empty).
  EdgeId pick(const std::vector<EdgeId>& candidates);

 private:
  std::mt19937_64 rng_;
  bool masked_;
};

/// Tabular Q-routing: Q_x(d, y) estimates the time to reach d from x when
/// forwarding to neighbour y. Unvisited entries read as 0.
class QTable {
 public:
  explicit QTable(double eta) : eta_(eta) {}

  double q(NodeId x, NodeId d, NodeId y) const;
  /// min over out-neighbours y of Q_x(d, y); 0 when x == d.
  double min_q(const RoadNetwork& net, NodeId x, NodeId d) const;
  /// Q += eta * (observed + min_next - Q).
  void update(NodeId x, NodeId d, NodeId y, double observed, double min_next);
  /// Greedy edge (lowest Q, ties to the smaller head id) or a uniform random
  /// out-edge with probability epsilon.
  EdgeId select(const RoadNetwork& net, NodeId x, NodeId d, double epsilon, std::mt19937_64& rng) const;

  double eta() const { return eta_; }
  std::size_t size() const { return table_.size(); }

  /// Binary dump: count, then (x, d, y, value) records, little-endian.
  std::string serialize() const;
  static QTable deserialize(const std::string& bytes);

 private:
  static std::uint64_t key(NodeId x, NodeId d, NodeId y);

  double eta_;
  std::unordered_map<std::uint64_t, double> table_;
};

/// epsilon annealed linearly from `start` to `end` over `episodes`.
double annealed_epsilon(int episode, int episodes, double start = 0.5, double end = 0.05);

/// Node-level Q-routing driver for the simulator. Learns from kEdgeCompleted events.
class QRouter {
 public:
  QRouter(double eta, std::uint64_t seed) : table_(eta), rng_(seed) {}

  void set_epsilon(double eps) { epsilon_ = eps; }
  void set_learning(bool on) { learning_ = on; }
  NextHopFn next_hop();
  void observe(const Simulator& sim, std::span<const SimEvent> events);

  QTable& table() { return table_; }
  const QTable& table() const { return table_; }

 private:
  QTable table_;
  std::mt19937_64 rng_;
  double epsilon_ = 0.0;
  bool learning_ = true;
};

}  // namespace rmarl
