#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rmarl/graph/road_network.hpp"

namespace rmarl {

/// Region assignment plus the derived cutting-edge and boundary-node sets.
///
/// cutting_edges(i) holds every edge leaving region i, in ascending edge id.
/// That order is the action order of region i's agent for the whole run.
/// boundary_nodes(i) holds tails of region i's cutting edges and heads of
/// cutting edges that enter region i.
class Partition {
 public:
  Partition() = default;
  Partition(const RoadNetwork& net, std::vector<RegionId> region_of);

  int num_regions() const { return static_cast<int>(cutting_.size()); }
  RegionId region_of(NodeId n) const { return region_of_.at(static_cast<std::size_t>(n)); }
  const std::vector<RegionId>& assignment() const { return region_of_; }

  const std::vector<EdgeId>& cutting_edges(RegionId r) const { return cutting_.at(static_cast<std::size_t>(r)); }
  const std::vector<NodeId>& boundary_nodes(RegionId r) const { return boundary_.at(static_cast<std::size_t>(r)); }
  const std::vector<NodeId>& nodes_in(RegionId r) const { return members_.at(static_cast<std::size_t>(r)); }

  /// All cutting edges in ascending edge id.
  const std::vector<EdgeId>& all_cutting_edges() const { return all_cutting_; }
  bool is_cutting(EdgeId e) const { return action_index_.at(static_cast<std::size_t>(e)) >= 0; }
  /// Position of a cutting edge inside its region's action list; -1 for internal edges.
  int action_index(EdgeId e) const { return action_index_.at(static_cast<std::size_t>(e)); }
  /// Largest |cutting_edges(i)| over all regions.
  int max_actions() const { return max_actions_; }

  /// Regions reachable in one cutting edge from r (ascending, unique).
  const std::vector<RegionId>& successors(RegionId r) const { return succ_.at(static_cast<std::size_t>(r)); }

  bool operator==(const Partition& o) const { return region_of_ == o.region_of_; }

 private:
  std::vector<RegionId> region_of_;
  std::vector<std::vector<EdgeId>> cutting_;
  std::vector<std::vector<NodeId>> boundary_;
  std::vector<std::vector<NodeId>> members_;
  std::vector<std::vector<RegionId>> succ_;
  std::vector<EdgeId> all_cutting_;
  std::vector<int> action_index_;
  int max_actions_ = 0;
};

/// `<node_id> <region_id>` per line, `#` comments.
Partition load_partition(std::string_view text, const RoadNetwork& net);
Partition load_partition_file(const std::string& path, const RoadNetwork& net);
std::string to_partition_text(const Partition& p);

/// ceil(total_edges / agent_capacity).
long estimate_region_count(long total_edges, long agent_capacity);

struct GridSpec {
  int regions_per_side = 2;
  int nodes_per_region_side = 5;
  double edge_length = 100.0;
  double max_speed = 13.89;
  int capacity = 10;
};

struct GridNetwork {
  RoadNetwork network;
  Partition partition;
  GridSpec spec;
};

/// Square grid of square regions. Intra-region neighbours are joined by
/// bidirectional edge pairs; adjacent regions are joined only on two
/// connector lanes per shared side (local offsets 1 and n-2), so the 2x5
/// grid has 84 directed segments and 4 cutting edges per region.
GridNetwork generate_grid(const GridSpec& spec);

/// Row/column of a grid node (row-major numbering).
inline NodeId grid_node(const GridSpec& s, int row, int col) {
  return static_cast<NodeId>(row * s.regions_per_side * s.nodes_per_region_side + col);
}

/// Local offsets on a region side that carry inter-region connectors.
std::vector<int> grid_connector_lanes(int nodes_per_region_side);

/// Seeded multi-source BFS growth followed by greedy boundary refinement.
/// Produces `regions` connected, non-empty regions with max/min size <= 2.
/// Throws if the network is not weakly connected or regions > node count.
Partition partition_network(const RoadNetwork& net, int regions, std::uint64_t seed);

}  // namespace rmarl
