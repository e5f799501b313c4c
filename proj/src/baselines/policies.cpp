#include "rmarl/baselines/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rmarl/reach/reachability.hpp"

namespace rmarl {

PathResult intra_region_route(const Simulator& sim, RegionId region, NodeId from, NodeId to) {
  const RoadNetwork& net = sim.network();
  const Partition& part = sim.partition();
  if (part.region_of(from) != region || part.region_of(to) != region) {
    throw std::invalid_argument("intra-region route endpoints must lie in region " + std::to_string(region));
  }
  return shortest_path(
      net, from, to, [&sim](EdgeId e) { return sim.travel_time(e); },
      [&](EdgeId e) {
        const Edge& ed = net.edge(e);
        return part.region_of(ed.from) == region && part.region_of(ed.to) == region;
      });
}

IntraPlanner dynamic_intra_planner() {
  return [](const Simulator& sim, RegionId region, NodeId from, NodeId to) {
    return intra_region_route(sim, region, from, to);
  };
}

EdgeId first_region_exit(const RoadNetwork& net, const Partition& part, const std::vector<NodeId>& path) {
  if (path.empty()) return kNoEdge;
  const RegionId r = part.region_of(path.front());
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (part.region_of(path[i + 1]) != r) return net.find_edge(path[i], path[i + 1]);
  }
  return kNoEdge;
}

EdgeId sp_action(const RoadNetwork& net, const Partition& part, DistanceOracle& dist, NodeId current, NodeId dest) {
  if (part.region_of(current) == part.region_of(dest)) return kNoEdge;
  const PathResult p = dist.path(current, dest);
  if (!p.found) throw NoPathError("no path from node " + std::to_string(current) + " to " + std::to_string(dest));
  return first_region_exit(net, part, p.nodes);
}

EdgeId spfr_action(const Simulator& sim, NodeId current, NodeId dest) {
  const RoadNetwork& net = sim.network();
  const Partition& part = sim.partition();
  const RegionId own = part.region_of(current);
  if (own == part.region_of(dest)) return kNoEdge;
  std::vector<double> mean_speed(static_cast<std::size_t>(part.num_regions()));
  for (RegionId r = 0; r < part.num_regions(); ++r) mean_speed[static_cast<std::size_t>(r)] = sim.region_mean_speed(r);
  const PathResult p = shortest_path(net, current, dest, [&](EdgeId e) {
    const Edge& ed = net.edge(e);
    const RegionId r = part.region_of(ed.from);
    if (r == own) return sim.travel_time(e);
    return ed.length / mean_speed[static_cast<std::size_t>(r)];
  });
  if (!p.found) throw NoPathError("no path from node " + std::to_string(current) + " to " + std::to_string(dest));
  return first_region_exit(net, part, p.nodes);
}

std::vector<EdgeId> ShortestPathPolicy::decide(const Simulator& sim, RegionId, std::span<const PlanRequest> requests,
                                               std::span<const std::vector<EdgeId>>) {
  std::vector<EdgeId> out;
  for (const PlanRequest& r : requests) {
    out.push_back(sp_action(sim.network(), sim.partition(), dist_, r.current_node, r.dest_node));
  }
  return out;
}

std::vector<EdgeId> DynamicShortestPathPolicy::decide(const Simulator& sim, RegionId,
                                                      std::span<const PlanRequest> requests,
                                                      std::span<const std::vector<EdgeId>>) {
  std::vector<EdgeId> out;
  for (const PlanRequest& r : requests) out.push_back(spfr_action(sim, r.current_node, r.dest_node));
  return out;
}

EdgeId RandomPolicy::pick(const std::vector<EdgeId>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidate actions");
  std::uniform_int_distribution<std::size_t> u(0, candidates.size() - 1);
  return candidates[u(rng_)];
}

std::vector<EdgeId> RandomPolicy::decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                                         std::span<const std::vector<EdgeId>> valid) {
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (masked_) {
      out.push_back(valid[i].empty() ? kNoEdge : pick(valid[i]));
    } else {
      out.push_back(pick(sim.partition().cutting_edges(region)));
    }
  }
  return out;
}

std::uint64_t QTable::key(NodeId x, NodeId d, NodeId y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 42) ^
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d)) << 21) ^
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
}

double QTable::q(NodeId x, NodeId d, NodeId y) const {
  const auto it = table_.find(key(x, d, y));
  return it == table_.end() ? 0.0 : it->second;
}

double QTable::min_q(const RoadNetwork& net, NodeId x, NodeId d) const {
  if (x == d) return 0.0;
  double best = kInf;
  for (EdgeId e : net.out_edges(x)) best = std::min(best, q(x, d, net.edge(e).to));
  return std::isfinite(best) ? best : 0.0;
}

void QTable::update(NodeId x, NodeId d, NodeId y, double observed, double min_next) {
  double& v = table_[key(x, d, y)];
  v += eta_ * (observed + min_next - v);
}

EdgeId QTable::select(const RoadNetwork& net, NodeId x, NodeId d, double epsilon, std::mt19937_64& rng) const {
  const auto out = net.out_edges(x);
  if (out.empty()) throw std::runtime_error("node " + std::to_string(x) + " has no outgoing edge");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (epsilon > 0.0 && u01(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    return out[pick(rng)];
  }
  EdgeId best = kNoEdge;
  double best_q = kInf;
  for (EdgeId e : out) {
    const NodeId y = net.edge(e).to;
    const double v = q(x, d, y);
    if (best == kNoEdge || v < best_q || (v == best_q && y < net.edge(best).to)) {
      best_q = v;
      best = e;
    }
  }
  return best;
}

std::string QTable::serialize() const {
  std::vector<std::pair<std::uint64_t, double>> rows(table_.begin(), table_.end());
  std::sort(rows.begin(), rows.end());
  std::string out;
  const auto put = [&out](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  const std::uint64_t count = rows.size();
  put(&count, sizeof(count));
  put(&eta_, sizeof(eta_));
  for (const auto& [k, v] : rows) {
    put(&k, sizeof(k));
    put(&v, sizeof(v));
  }
  return out;
}

QTable QTable::deserialize(const std::string& bytes) {
  std::size_t pos = 0;
  const auto get = [&](void* p, std::size_t n) {
    if (pos + n > bytes.size()) throw std::runtime_error("truncated Q-table dump");
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  };
  std::uint64_t count = 0;
  double eta = 0.0;
  get(&count, sizeof(count));
  get(&eta, sizeof(eta));
  QTable t(eta);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t k = 0;
    double v = 0.0;
    get(&k, sizeof(k));
    get(&v, sizeof(v));
    t.table_[k] = v;
  }
  return t;
}

double annealed_epsilon(int episode, int episodes, double start, double end) {
  if (episodes <= 1) return end;
  const double f = std::clamp(static_cast<double>(episode) / static_cast<double>(episodes - 1), 0.0, 1.0);
  return start + (end - start) * f;
}

NextHopFn QRouter::next_hop() {
  return [this](const Simulator& sim, const Vehicle& v, NodeId node) {
    return table_.select(sim.network(), node, v.dest, epsilon_, rng_);
  };
}

void QRouter::observe(const Simulator& sim, std::span<const SimEvent> events) {
  if (!learning_) return;
  const RoadNetwork& net = sim.network();
  for (const SimEvent& ev : events) {
    if (ev.type != SimEventType::kEdgeCompleted) continue;
    const Edge& e = net.edge(ev.edge);
    const NodeId d = sim.vehicle(ev.vehicle).dest;
    const double min_next = e.to == d ? 0.0 : table_.min_q(net, e.to, d);
    table_.update(e.from, d, e.to, ev.time - ev.enter_time, min_next);
  }
}

}  // namespace rmarl
