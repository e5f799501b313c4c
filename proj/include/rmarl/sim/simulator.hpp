#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmarl/graph/partition.hpp"
#include "rmarl/graph/shortest_path.hpp"
#include "rmarl/sim/congestion.hpp"
#include "rmarl/sim/injection.hpp"

namespace rmarl {

struct Vehicle {
  VehicleId id = -1;
  NodeId source = kNoNode;
  NodeId dest = kNoNode;
  double depart_time = 0.0;

  EdgeId current_edge = kNoEdge;
  double position_on_edge = 0.0;  // meters from the edge tail
  NodeId at_node = kNoNode;       // location while not on an edge
  double edge_enter_time = 0.0;
  std::vector<NodeId> planned_route;  // current intra-region sub-path

  RegionId region = kNoRegion;
  EdgeId target_cut = kNoEdge;  // assigned inter-region action
  bool waiting_for_plan = false;
  std::vector<RegionId> regions_visited;

  std::optional<double> arrive_time;
  double co2_g = 0.0;

  bool arrived() const { return arrive_time.has_value(); }
};

struct PlanRequest {
  VehicleId vehicle = -1;
  RegionId region = kNoRegion;
  NodeId current_node = kNoNode;
  NodeId dest_node = kNoNode;
  double issued_at = 0.0;
};

enum class SimEventType { kDeparted, kEnteredRegion, kNeedsIntraRoute, kArrived, kEdgeCompleted };

struct SimEvent {
  SimEventType type;
  VehicleId vehicle = -1;
  double time = 0.0;  // for kEdgeCompleted: exit time (fractional seconds)
  NodeId node = kNoNode;
  EdgeId edge = kNoEdge;
  RegionId region = kNoRegion;
  double enter_time = 0.0;  // kEdgeCompleted only
};

struct SimConfig {
  CongestionModel model = CongestionModel::kExperiment;
  double alpha = 0.1;
  long episode_len = 600;  // T, seconds
  double idle_g = 1.0;     // CO2 surrogate, g/s
  double drive_g = 0.12;   // CO2 surrogate, g per meter travelled
  bool record_trace = false;
};

struct TraceRow {
  long t;
  VehicleId vehicle;
  EdgeId edge;
  double position;
  double speed;
};

struct EpisodeMetrics {
  long throughput = 0;
  std::optional<double> avtt_s;  // undefined without arrivals
  double co2_kg = 0.0;           // per injected vehicle
  long episode_len = 0;
  long injected = 0;
};

std::string metrics_json(const EpisodeMetrics& m);

class Simulator;

/// Intra-region path from `from` to `to` inside `region`.
using IntraPlanner = std::function<PathResult(const Simulator&, RegionId region, NodeId from, NodeId to)>;
/// Node-level routing: outgoing edge of `node` for `vehicle`.
using NextHopFn = std::function<EdgeId(const Simulator&, const Vehicle& vehicle, NodeId node)>;
/// Resolves all plan requests of one step by calling Simulator::assign.
using RequestHandler = std::function<void(Simulator&, std::span<const PlanRequest>)>;

/// One-second-step traffic simulator.
///
/// Per step: begin_step() releases due vehicles and returns the plan requests
/// that must be answered (departures and region entries outside the
/// destination region); the caller answers each with assign(); finish_step()
/// moves every vehicle for one second and advances the clock. Speeds use the
/// edge counts observed at the start of the step.
class Simulator {
 public:
  Simulator(const RoadNetwork& net, const Partition& part, SimConfig config, IntraPlanner planner);

  void set_injector(Injector injector) { injector_.emplace(std::move(injector)); }
  /// Fixed trips, released when the clock reaches their departure second.
  void schedule(std::vector<Trip> trips);
  /// Switches to node-level routing; no plan requests are issued.
  void set_next_hop(NextHopFn fn) { next_hop_ = std::move(fn); }

  /// Test hook: put a vehicle directly onto an edge.
  void place_on_edge(const Trip& trip, EdgeId edge, double position);

  std::vector<PlanRequest> begin_step();
  void assign(VehicleId vehicle, EdgeId cutting_edge);
  std::vector<SimEvent> finish_step();
  std::vector<SimEvent> step(const RequestHandler& handler);

  bool done() const { return clock_ >= config_.episode_len; }
  long clock() const { return clock_; }

  const RoadNetwork& network() const { return *net_; }
  const Partition& partition() const { return *part_; }
  const SimConfig& config() const { return config_; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Vehicle& vehicle(VehicleId id) const { return vehicles_.at(static_cast<std::size_t>(id)); }

  int edge_count(EdgeId e) const { return edge_counts_.at(static_cast<std::size_t>(e)); }
  const std::vector<int>& edge_counts() const { return edge_counts_; }
  double current_speed(EdgeId e) const;
  double travel_time(EdgeId e) const;
  /// Vehicles whose location (edge tail or current node) lies in `r`.
  int region_vehicle_count(RegionId r) const;
  /// Mean effective speed over edges whose tail lies in `r`.
  double region_mean_speed(RegionId r) const;

  long injected() const { return static_cast<long>(vehicles_.size()); }
  long running() const { return injected() - arrived_; }
  long arrived() const { return arrived_; }

  long throughput() const { return arrived_; }
  std::optional<double> avtt() const;
  double co2_g_per_vehicle() const;
  EpisodeMetrics metrics() const;

  /// (second, cutting edge) for every vehicle entering a cutting edge.
  const std::vector<std::pair<long, EdgeId>>& cut_entries() const { return cut_entries_; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  Vehicle& add_vehicle(const Trip& trip, NodeId at);
  void request_plan(Vehicle& v, double at);
  EdgeId choose_edge(Vehicle& v, std::vector<SimEvent>& events);
  void recount();

  const RoadNetwork* net_;
  const Partition* part_;
  SimConfig config_;
  IntraPlanner planner_;
  NextHopFn next_hop_;
  std::optional<Injector> injector_;
  std::vector<Trip> scheduled_;
  std::size_t next_scheduled_ = 0;

  long clock_ = 0;
  bool in_step_ = false;
  std::vector<Vehicle> vehicles_;
  std::vector<VehicleId> active_;  // not yet arrived, ascending id
  std::vector<int> edge_counts_;
  std::vector<PlanRequest> pending_;
  std::vector<SimEvent> begin_events_;
  long arrived_ = 0;
  std::vector<std::pair<long, EdgeId>> cut_entries_;
  std::vector<TraceRow> trace_;
};

std::string trace_csv(const std::vector<TraceRow>& rows);

}  // namespace rmarl
