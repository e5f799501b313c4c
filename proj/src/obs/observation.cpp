#include "rmarl/obs/observation.hpp"

#include <algorithm>
#include <stdexcept>

namespace rmarl {

namespace {

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

double scale_to_unit(double v, double lo, double hi) {
  if (hi - lo <= 0.0) return 0.0;
  return clamp1(2.0 * (v - lo) / (hi - lo) - 1.0);
}

}  // namespace

ObservationBuilder::ObservationBuilder(const RoadNetwork& net, const Partition& part, ObsScales scales)
    : net_(&net), part_(&part), scales_(scales), k_max_(part.max_actions()), dist_(net) {
  if (scales_.speed <= 0.0) scales_.speed = net.max_speed();
  if (scales_.length <= 0.0) {
    for (const Edge& e : net.edges()) scales_.length = std::max(scales_.length, e.length);
  }
  if (scales_.distance <= 0.0) {
    const BoundingBox& b = net.bounds();
    scales_.distance = (b.max_x - b.min_x) + (b.max_y - b.min_y);
  }
  for (double* s : {&scales_.time, &scales_.count, &scales_.speed, &scales_.length, &scales_.distance}) {
    if (!(*s > 0.0)) *s = 1.0;
  }
}

double ObservationBuilder::norm_x(double x) const {
  return scale_to_unit(x, net_->bounds().min_x, net_->bounds().max_x);
}

double ObservationBuilder::norm_y(double y) const {
  return scale_to_unit(y, net_->bounds().min_y, net_->bounds().max_y);
}

std::vector<double> ObservationBuilder::raw_edge_features(const Simulator& sim, EdgeId e) const {
  const Edge& edge = net_->edge(e);
  const Node& a = net_->node(edge.from);
  const Node& b = net_->node(edge.to);
  const RegionId neighbor = part_->region_of(edge.to);
  return {a.x,
          a.y,
          b.x,
          b.y,
          edge.length,
          sim.travel_time(e),
          static_cast<double>(sim.region_vehicle_count(neighbor)),
          sim.region_mean_speed(neighbor)};
}

std::vector<double> ObservationBuilder::normalize_edge(const std::vector<double>& raw) const {
  return {norm_x(raw[0]),
          norm_y(raw[1]),
          norm_x(raw[2]),
          norm_y(raw[3]),
          clamp1(raw[4] / scales_.length),
          clamp1(raw[5] / scales_.time),
          clamp1(raw[6] / scales_.count),
          clamp1(raw[7] / scales_.speed)};
}

RoadObservation ObservationBuilder::raw_road_observation(const Simulator& sim, RegionId region) const {
  RoadObservation obs;
  for (EdgeId e : part_->cutting_edges(region)) {
    const auto row = raw_edge_features(sim, e);
    obs.data.insert(obs.data.end(), row.begin(), row.end());
    ++obs.rows;
  }
  return obs;
}

RoadObservation ObservationBuilder::road_observation(const Simulator& sim, RegionId region) const {
  RoadObservation obs;
  for (EdgeId e : part_->cutting_edges(region)) {
    const auto row = normalize_edge(raw_edge_features(sim, e));
    obs.data.insert(obs.data.end(), row.begin(), row.end());
    ++obs.rows;
  }
  return obs;
}

std::vector<double> ObservationBuilder::raw_request_observation(const Simulator& sim, const PlanRequest& req) {
  if (part_->region_of(req.current_node) != req.region) {
    throw std::invalid_argument("request region does not contain its current node");
  }
  const Node& cur = net_->node(req.current_node);
  const Node& dst = net_->node(req.dest_node);
  std::vector<double> out{cur.x, cur.y, dst.x, dst.y};
  out.resize(static_cast<std::size_t>(request_features()), kSentinel);

  const RegionId r = req.region;
  const auto in_region = [&](EdgeId e) {
    const Edge& edge = net_->edge(e);
    return part_->region_of(edge.from) == r && part_->region_of(edge.to) == r;
  };
  const auto times = distances_from(*net_, req.current_node, [&](EdgeId e) { return sim.travel_time(e); }, in_region);
  const auto& to_dest = dist_.to(req.dest_node);

  const auto& cuts = part_->cutting_edges(r);
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const Edge& e = net_->edge(cuts[j]);
    const double t = times[static_cast<std::size_t>(e.from)];
    if (t < kInf) out[4 + j] = t;
    const double tail = to_dest[static_cast<std::size_t>(e.to)];
    if (tail < kInf) out[4 + static_cast<std::size_t>(k_max_) + j] = e.length + tail;
  }
  return out;
}

std::vector<double> ObservationBuilder::request_observation(const Simulator& sim, const PlanRequest& req) {
  auto out = raw_request_observation(sim, req);
  out[0] = norm_x(out[0]);
  out[1] = norm_y(out[1]);
  out[2] = norm_x(out[2]);
  out[3] = norm_y(out[3]);
  const std::size_t k = static_cast<std::size_t>(k_max_);
  for (std::size_t j = 0; j < k; ++j) {
    double& t = out[4 + j];
    if (t != kSentinel) t = clamp1(t / scales_.time);
    double& d = out[4 + k + j];
    if (d != kSentinel) d = clamp1(d / scales_.distance);
  }
  return out;
}

std::vector<double> ObservationBuilder::global_state(const Simulator& sim) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(global_size()));
  for (EdgeId e : part_->all_cutting_edges()) {
    const auto row = normalize_edge(raw_edge_features(sim, e));
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<double> ObservationBuilder::local_state(const std::vector<double>& global,
                                                    const std::vector<double>& request) const {
  if (static_cast<int>(global.size()) != global_size() || static_cast<int>(request.size()) != request_features()) {
    throw std::invalid_argument("local_state: input sizes do not match the layout");
  }
  std::vector<double> out = global;
  out.insert(out.end(), request.begin(), request.end());
  return out;
}

}  // namespace rmarl
