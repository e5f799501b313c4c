#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "rmarl/graph/partition.hpp"

namespace rmarl {

/// A vehicle to be released into the network.
struct Trip {
  VehicleId id = -1;
  NodeId source = kNoNode;
  NodeId dest = kNoNode;
  double depart_time = 0.0;

  bool operator==(const Trip&) const = default;
};

/// Origin-destination sampler. Region-to-region mode draws sources uniformly
/// from one region and destinations uniformly from another; uniform mode
/// draws both from the whole network. Source == dest draws are resampled.
class OdSampler {
 public:
  /// Empty sampler; sample() throws until a real one is assigned.
  OdSampler() = default;
  static OdSampler uniform(const RoadNetwork& net);
  static OdSampler region_to_region(const Partition& part, RegionId from, RegionId to);
  /// Explicit candidate lists.
  OdSampler(std::vector<NodeId> sources, std::vector<NodeId> dests);

  std::pair<NodeId, NodeId> sample(std::mt19937_64& rng) const;

  static constexpr int kMaxRetries = 100;

 private:
  std::vector<NodeId> sources_;
  std::vector<NodeId> dests_;
};

struct InjectionSpec {
  double vehicles_per_second = 1.0;
  /// Without re-injection: total vehicles released. With re-injection: the cap
  /// on vehicles simultaneously in the network.
  int max_vehicles = 200;
  bool reinject = false;
};

/// Number of vehicles released in second `t` for a (possibly fractional) rate.
int batch_size(double vehicles_per_second, long t);

/// One batch per second until spec.max_vehicles trips exist (re-injection off).
std::vector<Trip> inject_schedule(const InjectionSpec& spec, const OdSampler& sampler, std::uint64_t seed);

/// Online release of trips, one call per simulated second.
class Injector {
 public:
  Injector(InjectionSpec spec, OdSampler sampler, std::uint64_t seed);

  /// Trips departing at second `t`, given the number of vehicles still running.
  std::vector<Trip> release(long t, int running);

  int injected() const { return next_id_; }

 private:
  InjectionSpec spec_;
  OdSampler sampler_;
  std::mt19937_64 rng_;
  int next_id_ = 0;
};

}  // namespace rmarl
