#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rmarl/graph/partition.hpp"
#include "rmarl/graph/shortest_path.hpp"

namespace rmarl {

/// Raised when a trip's destination cannot be reached.
class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge of a per-vehicle abstract graph. `real_edge` is the cutting edge it
/// stands for, or kNoEdge for a virtual edge weighted by static distance.
struct RouteEdge {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  double weight = 0.0;
  EdgeId real_edge = kNoEdge;
};

/// Node and edge sets of a connection or reachability graph. Nodes are road
/// network node ids kept in ascending order.
struct RouteGraph {
  NodeId source = kNoNode;
  NodeId dest = kNoNode;
  std::vector<NodeId> nodes;
  std::vector<RegionId> node_region;  // parallel to nodes
  std::vector<RouteEdge> edges;
  std::vector<RegionId> regions;  // regions the trip may traverse, ascending

  /// Position of `n` in `nodes`, or -1.
  int index_of(NodeId n) const;
  /// Out-edge indices per node position.
  std::vector<std::vector<int>> out_lists() const;
};

struct ConnectionGraph : RouteGraph {};

struct ReachabilityGraph : RouteGraph {
  /// Cutting edges present in the graph, ascending.
  std::vector<EdgeId> cutting;
  bool has_cutting(EdgeId e) const;
};

/// Shortest-path distances from the graph's source, per node position.
std::vector<double> route_distances(const RouteGraph& g);

struct RoutePath {
  bool found = false;
  double weight = kInf;
  std::vector<NodeId> nodes;
};
/// Cheapest source -> dest path inside `g`; ties go to the smaller next node id.
RoutePath route_shortest_path(const RouteGraph& g);

/// Regions lying on some simple region-level path from `from` to `to`.
std::vector<RegionId> regions_between(const Partition& part, RegionId from, RegionId to);

ConnectionGraph build_connection_graph(const RoadNetwork& net, const Partition& part, DistanceOracle& dist,
                                       NodeId source, NodeId dest);

/// Keeps edges u -> v with dist(u) < dist(v) whose region order is consistent
/// with the trip's region ranking, then drops edges not on any source -> dest path.
ReachabilityGraph dag_convert(const ConnectionGraph& cg);

/// Cutting edges of `region` present in `rg` whose tail is reachable from
/// `current` in `rg`, ascending. Empty in the destination region or at a dead end.
std::vector<EdgeId> valid_actions(const ReachabilityGraph& rg, const Partition& part, RegionId region, NodeId current);

/// Boolean mask over part.cutting_edges(region) for a set of valid edges.
std::vector<bool> action_mask(const Partition& part, RegionId region, const std::vector<EdgeId>& valid);

/// Edge-list dump of an abstract graph (virtual edges get capacity 1, speed 1).
std::string to_debug_edge_list(const RouteGraph& g, const RoadNetwork& net);

}  // namespace rmarl
