#include "rmarl/sim/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include "json.hpp"
#include <stdexcept>

namespace rmarl {

std::string metrics_json(const EpisodeMetrics& m) {
  nlohmann::json j;
  j["throughput"] = m.throughput;
  j["avtt_s"] = m.avtt_s ? nlohmann::json(*m.avtt_s) : nlohmann::json(nullptr);
  j["co2_kg"] = m.co2_kg;
  j["episode_len"] = m.episode_len;
  j["injected"] = m.injected;
  return j.dump(2);
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "t,vehicle_id,edge_id,position,speed\n";
  char buf[128];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%d,%.6f,%.6f\n", r.t, r.vehicle, r.edge, r.position, r.speed);
    out += buf;
  }
  return out;
}

Simulator::Simulator(const RoadNetwork& net, const Partition& part, SimConfig config, IntraPlanner planner)
    : net_(&net), part_(&part), config_(config), planner_(std::move(planner)), edge_counts_(net.num_edges(), 0) {
  if (part.assignment().size() != net.num_nodes()) throw std::invalid_argument("partition does not match network");
  if (!(config_.alpha > 0.0 && config_.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (config_.episode_len < 1) throw std::invalid_argument("episode length must be >= 1");
}

void Simulator::schedule(std::vector<Trip> trips) {
  std::stable_sort(trips.begin(), trips.end(),
                   [](const Trip& a, const Trip& b) { return a.depart_time < b.depart_time; });
  scheduled_ = std::move(trips);
  next_scheduled_ = 0;
}

Vehicle& Simulator::add_vehicle(const Trip& trip, NodeId at) {
  if (trip.id != static_cast<VehicleId>(vehicles_.size())) {
    throw std::invalid_argument("vehicle ids must be assigned densely in release order");
  }
  if (!net_->valid_node(trip.source) || !net_->valid_node(trip.dest)) throw std::out_of_range("trip node out of range");
  Vehicle v;
  v.id = trip.id;
  v.source = trip.source;
  v.dest = trip.dest;
  v.depart_time = trip.depart_time;
  v.at_node = at;
  v.region = part_->region_of(at);
  v.regions_visited.push_back(v.region);
  vehicles_.push_back(std::move(v));
  active_.push_back(trip.id);
  return vehicles_.back();
}

void Simulator::place_on_edge(const Trip& trip, EdgeId edge, double position) {
  const Edge& e = net_->edge(edge);
  if (position < 0.0 || position > e.length) throw std::out_of_range("position outside edge");
  Vehicle& v = add_vehicle(trip, e.from);
  v.at_node = kNoNode;
  v.current_edge = edge;
  v.position_on_edge = position;
  v.edge_enter_time = static_cast<double>(clock_);
  recount();
}

void Simulator::request_plan(Vehicle& v, double at) {
  v.waiting_for_plan = true;
  v.target_cut = kNoEdge;
  pending_.push_back(PlanRequest{v.id, v.region, v.at_node, v.dest, at});
}

std::vector<PlanRequest> Simulator::begin_step() {
  if (in_step_) throw std::logic_error("begin_step called twice");
  if (done()) throw std::logic_error("episode already finished");
  in_step_ = true;
  begin_events_.clear();

  std::vector<Trip> due;
  while (next_scheduled_ < scheduled_.size() && scheduled_[next_scheduled_].depart_time <= static_cast<double>(clock_)) {
    due.push_back(scheduled_[next_scheduled_++]);
  }
  if (injector_) {
    auto batch = injector_->release(clock_, static_cast<int>(running()));
    due.insert(due.end(), batch.begin(), batch.end());
  }
  for (Trip& trip : due) {
    trip.depart_time = static_cast<double>(clock_);
    Vehicle& v = add_vehicle(trip, trip.source);
    begin_events_.push_back(SimEvent{SimEventType::kDeparted, v.id, v.depart_time, v.source, kNoEdge, v.region});
    if (!next_hop_ && v.region != part_->region_of(v.dest)) request_plan(v, v.depart_time);
  }

  std::vector<PlanRequest> out;
  out.swap(pending_);
  std::sort(out.begin(), out.end(), [](const PlanRequest& a, const PlanRequest& b) { return a.vehicle < b.vehicle; });
  pending_ = out;  // kept until answered
  return out;
}

void Simulator::assign(VehicleId id, EdgeId cutting_edge) {
  Vehicle& v = vehicles_.at(static_cast<std::size_t>(id));
  if (!v.waiting_for_plan) throw std::logic_error("vehicle " + std::to_string(id) + " has no open plan request");
  if (!part_->is_cutting(cutting_edge) || part_->region_of(net_->edge(cutting_edge).from) != v.region) {
    throw std::invalid_argument("edge " + std::to_string(cutting_edge) + " is not a cutting edge of region " +
                                std::to_string(v.region));
  }
  v.target_cut = cutting_edge;
  v.waiting_for_plan = false;
  std::erase_if(pending_, [id](const PlanRequest& r) { return r.vehicle == id; });
}

EdgeId Simulator::choose_edge(Vehicle& v, std::vector<SimEvent>& events) {
  const NodeId node = v.at_node;
  if (next_hop_) {
    const EdgeId e = next_hop_(*this, v, node);
    if (e == kNoEdge || net_->edge(e).from != node) {
      throw std::runtime_error("next-hop policy returned an edge not leaving node " + std::to_string(node));
    }
    return e;
  }
  const bool in_dest_region = v.region == part_->region_of(v.dest);
  if (!in_dest_region && v.target_cut == kNoEdge) {
    throw std::logic_error("vehicle " + std::to_string(v.id) + " has no inter-region plan");
  }
  if (!in_dest_region && net_->edge(v.target_cut).from == node) return v.target_cut;

  const NodeId target = in_dest_region ? v.dest : net_->edge(v.target_cut).from;
  if (v.planned_route.empty()) {
    events.push_back(SimEvent{SimEventType::kNeedsIntraRoute, v.id, static_cast<double>(clock_), node, kNoEdge, v.region});
  }
  const PathResult path = planner_(*this, v.region, node, target);
  if (!path.found || path.nodes.size() < 2) {
    throw std::runtime_error("no intra-region route for vehicle " + std::to_string(v.id) + " from node " +
                             std::to_string(node) + " to node " + std::to_string(target));
  }
  v.planned_route.assign(path.nodes.begin() + 1, path.nodes.end());
  const EdgeId e = net_->find_edge(node, path.nodes[1]);
  if (e == kNoEdge) throw std::runtime_error("intra-region route uses a missing edge");
  return e;
}

std::vector<SimEvent> Simulator::finish_step() {
  if (!in_step_) throw std::logic_error("finish_step without begin_step");
  if (!pending_.empty()) {
    throw std::logic_error("plan request for vehicle " + std::to_string(pending_.front().vehicle) + " not answered");
  }
  std::vector<SimEvent> events = std::move(begin_events_);
  begin_events_.clear();

  const std::vector<int> snapshot = edge_counts_;
  const double t0 = static_cast<double>(clock_);
  const double t1 = t0 + 1.0;
  std::vector<VehicleId> still_active;
  still_active.reserve(active_.size());

  for (VehicleId id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    double budget = 1.0;
    double moved = 0.0;
    while (budget > 0.0) {
      if (v.current_edge == kNoEdge) {
        const EdgeId e = choose_edge(v, events);
        v.current_edge = e;
        v.position_on_edge = 0.0;
        v.at_node = kNoNode;
        v.edge_enter_time = t1 - budget;
        if (!v.planned_route.empty() && v.planned_route.front() == net_->edge(e).to) {
          v.planned_route.erase(v.planned_route.begin());
        }
        if (part_->is_cutting(e)) cut_entries_.emplace_back(clock_, e);
      }
      const Edge& edge = net_->edge(v.current_edge);
      const double speed =
          effective_speed(edge, snapshot[static_cast<std::size_t>(edge.id)], config_.model, config_.alpha);
      const double remaining = edge.length - v.position_on_edge;
      const double need = remaining / speed;
      if (need > budget) {
        v.position_on_edge = std::min(edge.length, v.position_on_edge + speed * budget);
        moved += speed * budget;
        budget = 0.0;
        break;
      }
      budget -= need;
      moved += remaining;
      events.push_back(SimEvent{SimEventType::kEdgeCompleted, v.id, t1 - budget, edge.to, edge.id,
                                part_->region_of(edge.to), v.edge_enter_time});
      v.current_edge = kNoEdge;
      v.position_on_edge = 0.0;
      v.at_node = edge.to;

      if (v.at_node == v.dest) {
        v.arrive_time = t1;
        v.planned_route.clear();
        ++arrived_;
        events.push_back(SimEvent{SimEventType::kArrived, v.id, t1, v.dest, kNoEdge, part_->region_of(v.dest)});
        break;
      }
      const RegionId nr = part_->region_of(v.at_node);
      if (nr != v.region) {
        v.region = nr;
        v.regions_visited.push_back(nr);
        v.target_cut = kNoEdge;
        v.planned_route.clear();
        events.push_back(SimEvent{SimEventType::kEnteredRegion, v.id, t1, v.at_node, edge.id, nr});
        if (!next_hop_ && nr != part_->region_of(v.dest)) {
          // Wait at the boundary node for the new region's decision.
          request_plan(v, t1);
          break;
        }
      } else if (!next_hop_ && v.target_cut == kNoEdge && nr != part_->region_of(v.dest)) {
        request_plan(v, t1);
        break;
      }
    }
    v.co2_g += config_.idle_g + config_.drive_g * moved;
    if (!v.arrived()) still_active.push_back(id);
  }

  active_ = std::move(still_active);
  ++clock_;
  in_step_ = false;
  recount();

  if (config_.record_trace) {
    for (VehicleId id : active_) {
      const Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
      if (v.current_edge == kNoEdge) continue;
      trace_.push_back(TraceRow{clock_, v.id, v.current_edge, v.position_on_edge, current_speed(v.current_edge)});
    }
  }
  return events;
}

std::vector<SimEvent> Simulator::step(const RequestHandler& handler) {
  const auto requests = begin_step();
  if (!requests.empty()) {
    if (!handler) throw std::logic_error("plan requests issued but no handler given");
    handler(*this, requests);
  }
  return finish_step();
}

void Simulator::recount() {
  std::fill(edge_counts_.begin(), edge_counts_.end(), 0);
  for (VehicleId id : active_) {
    const Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    if (v.current_edge != kNoEdge) ++edge_counts_[static_cast<std::size_t>(v.current_edge)];
  }
}

double Simulator::current_speed(EdgeId e) const {
  return effective_speed(net_->edge(e), edge_count(e), config_.model, config_.alpha);
}

double Simulator::travel_time(EdgeId e) const { return net_->edge(e).length / current_speed(e); }

int Simulator::region_vehicle_count(RegionId r) const {
  int n = 0;
  for (VehicleId id : active_) {
    const Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    const NodeId where = v.current_edge != kNoEdge ? net_->edge(v.current_edge).from : v.at_node;
    n += part_->region_of(where) == r;
  }
  return n;
}

double Simulator::region_mean_speed(RegionId r) const {
  double sum = 0.0;
  int n = 0;
  for (NodeId u : part_->nodes_in(r)) {
    for (EdgeId e : net_->out_edges(u)) {
      sum += current_speed(e);
      ++n;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

std::optional<double> Simulator::avtt() const {
  if (arrived_ == 0) return std::nullopt;
  double total = 0.0;
  for (const Vehicle& v : vehicles_) {
    if (v.arrived()) total += *v.arrive_time - v.depart_time;
  }
  return total / static_cast<double>(arrived_);
}

double Simulator::co2_g_per_vehicle() const {
  if (vehicles_.empty()) return 0.0;
  double total = 0.0;
  for (const Vehicle& v : vehicles_) total += v.co2_g;
  return total / static_cast<double>(vehicles_.size());
}

EpisodeMetrics Simulator::metrics() const {
  return EpisodeMetrics{throughput(), avtt(), co2_g_per_vehicle() / 1000.0, clock_, injected()};
}

}  // namespace rmarl
