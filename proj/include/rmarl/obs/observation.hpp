#pragma once

#include <vector>

#include "rmarl/graph/partition.hpp"
#include "rmarl/graph/shortest_path.hpp"
#include "rmarl/sim/simulator.hpp"

namespace rmarl {

/// Road-feature columns per cutting edge.
inline constexpr int kRoadFeatures = 8;
/// Fill value for request slots beyond a region's action count or unreachable tails.
inline constexpr double kSentinel = -1.0;

/// Row-major |E_i^c| x kRoadFeatures matrix, rows in cutting_edges(i) order:
/// [start x, start y, end x, end y, length, current travel time,
///  vehicles in the head's region, mean effective speed in the head's region].
struct RoadObservation {
  int rows = 0;
  std::vector<double> data;

  std::vector<double> row(int r) const {
    return {data.begin() + r * kRoadFeatures, data.begin() + (r + 1) * kRoadFeatures};
  }
};

/// Normalisation constants. Coordinates are min-max scaled to [-1, 1] by the
/// network bounding box; the rest are divided by these scales and clamped.
struct ObsScales {
  double time = 600.0;      // seconds (default: episode length T)
  double count = 200.0;     // vehicles (default: max vehicles)
  double speed = 0.0;       // m/s; 0 means the network's max speed
  double length = 0.0;      // meters; 0 means the longest edge
  double distance = 0.0;    // meters; 0 means bounding-box width + height
};

class ObservationBuilder {
 public:
  ObservationBuilder(const RoadNetwork& net, const Partition& part, ObsScales scales);

  int road_features() const { return kRoadFeatures; }
  int max_actions() const { return k_max_; }
  /// F' = 4 + 2 * K_max.
  int request_features() const { return 4 + 2 * k_max_; }
  /// |E^c| * F.
  int global_size() const { return static_cast<int>(part_->all_cutting_edges().size()) * kRoadFeatures; }
  int local_size() const { return global_size() + request_features(); }

  /// Unnormalised features (meters, seconds, vehicles, m/s).
  RoadObservation raw_road_observation(const Simulator& sim, RegionId region) const;
  std::vector<double> raw_request_observation(const Simulator& sim, const PlanRequest& req);

  RoadObservation road_observation(const Simulator& sim, RegionId region) const;
  std::vector<double> request_observation(const Simulator& sim, const PlanRequest& req);
  std::vector<double> global_state(const Simulator& sim) const;
  std::vector<double> local_state(const std::vector<double>& global, const std::vector<double>& request) const;

  const ObsScales& scales() const { return scales_; }

 private:
  std::vector<double> raw_edge_features(const Simulator& sim, EdgeId e) const;
  std::vector<double> normalize_edge(const std::vector<double>& raw) const;
  double norm_x(double x) const;
  double norm_y(double y) const;

  const RoadNetwork* net_;
  const Partition* part_;
  ObsScales scales_;
  int k_max_;
  DistanceOracle dist_;
};

}  // namespace rmarl
