#pragma once

#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "rmarl/graph/road_network.hpp"

namespace rmarl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class PathWeight { kDistance, kFreeFlowTime };

double static_weight(const Edge& e, PathWeight w);

/// A path result; `found == false` is the explicit no-path outcome.
struct PathResult {
  bool found = false;
  std::vector<NodeId> nodes;
  double cost = kInf;
};

using EdgeWeightFn = std::function<double(EdgeId)>;
using EdgeFilterFn = std::function<bool(EdgeId)>;

/// Cost of the cheapest path from every node to `dest` (reverse Dijkstra).
/// Unreachable nodes get kInf. Edges rejected by `allow` are ignored.
std::vector<double> distances_to(const RoadNetwork& net, NodeId dest, const EdgeWeightFn& weight,
                                 const EdgeFilterFn& allow = {});

/// Cost of the cheapest path from `source` to every node.
std::vector<double> distances_from(const RoadNetwork& net, NodeId source, const EdgeWeightFn& weight,
                                   const EdgeFilterFn& allow = {});

/// Extracts a cheapest source -> dest path from a reverse distance table.
/// Among equal-cost continuations the smallest next node id wins.
PathResult path_from_distances(const RoadNetwork& net, NodeId source, NodeId dest,
                               const std::vector<double>& dist_to_dest, const EdgeWeightFn& weight,
                               const EdgeFilterFn& allow = {});

PathResult shortest_path(const RoadNetwork& net, NodeId source, NodeId dest, const EdgeWeightFn& weight,
                         const EdgeFilterFn& allow = {});

PathResult static_shortest_path(const RoadNetwork& net, NodeId source, NodeId dest,
                                PathWeight weight = PathWeight::kDistance);

/// Memoised static road distances (meters), one reverse Dijkstra per queried
/// destination. Not thread-safe.
class DistanceOracle {
 public:
  explicit DistanceOracle(const RoadNetwork& net) : net_(&net) {}

  const std::vector<double>& to(NodeId dest);
  double distance(NodeId from, NodeId to) { return this->to(to)[static_cast<std::size_t>(from)]; }
  PathResult path(NodeId from, NodeId to);

  const RoadNetwork& network() const { return *net_; }

 private:
  const RoadNetwork* net_;
  std::unordered_map<NodeId, std::vector<double>> cache_;
};

}  // namespace rmarl
