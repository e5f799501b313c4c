#include "rmarl/graph/shortest_path.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rmarl {

double static_weight(const Edge& e, PathWeight w) {
  return w == PathWeight::kDistance ? e.length : e.free_flow_time();
}

namespace {

using HeapItem = std::pair<double, NodeId>;

// Min-heap on (cost, node id) so pops are deterministic.
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

std::vector<double> dijkstra(const RoadNetwork& net, NodeId start, bool reverse, const EdgeWeightFn& weight,
                             const EdgeFilterFn& allow) {
  std::vector<double> dist(net.num_nodes(), kInf);
  if (!net.valid_node(start)) throw std::out_of_range("node id out of range");
  dist[static_cast<std::size_t>(start)] = 0.0;
  MinHeap heap;
  heap.emplace(0.0, start);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    const auto edges = reverse ? net.in_edges(u) : net.out_edges(u);
    for (EdgeId e : edges) {
      if (allow && !allow(e)) continue;
      const Edge& ed = net.edge(e);
      const NodeId v = reverse ? ed.from : ed.to;
      const double nd = d + weight(e);
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> distances_to(const RoadNetwork& net, NodeId dest, const EdgeWeightFn& weight,
                                 const EdgeFilterFn& allow) {
  return dijkstra(net, dest, /*reverse=*/true, weight, allow);
}

std::vector<double> distances_from(const RoadNetwork& net, NodeId source, const EdgeWeightFn& weight,
                                   const EdgeFilterFn& allow) {
  return dijkstra(net, source, /*reverse=*/false, weight, allow);
}

PathResult path_from_distances(const RoadNetwork& net, NodeId source, NodeId dest,
                               const std::vector<double>& dist_to_dest, const EdgeWeightFn& weight,
                               const EdgeFilterFn& allow) {
  PathResult out;
  const double total = dist_to_dest.at(static_cast<std::size_t>(source));
  if (!std::isfinite(total)) return out;
  out.found = true;
  out.cost = total;
  out.nodes.push_back(source);
  NodeId u = source;
  while (u != dest) {
    const double du = dist_to_dest[static_cast<std::size_t>(u)];
    const double tol = 1e-9 * std::max(1.0, du);
    NodeId best = kNoNode;
    for (EdgeId e : net.out_edges(u)) {
      if (allow && !allow(e)) continue;
      const NodeId v = net.edge(e).to;
      const double dv = dist_to_dest[static_cast<std::size_t>(v)];
      if (!std::isfinite(dv) || dv >= du) continue;
      if (std::abs(weight(e) + dv - du) <= tol && (best == kNoNode || v < best)) best = v;
    }
    if (best == kNoNode) {
      // Only reachable through rounding drift; fall back to the strictly cheapest successor.
      double best_cost = kInf;
      for (EdgeId e : net.out_edges(u)) {
        if (allow && !allow(e)) continue;
        const NodeId v = net.edge(e).to;
        const double c = weight(e) + dist_to_dest[static_cast<std::size_t>(v)];
        if (c < best_cost) {
          best_cost = c;
          best = v;
        }
      }
    }
    out.nodes.push_back(best);
    u = best;
    if (out.nodes.size() > net.num_nodes()) throw std::logic_error("path extraction did not terminate");
  }
  return out;
}

PathResult shortest_path(const RoadNetwork& net, NodeId source, NodeId dest, const EdgeWeightFn& weight,
                         const EdgeFilterFn& allow) {
  if (!net.valid_node(source) || !net.valid_node(dest)) throw std::out_of_range("node id out of range");
  const auto dist = distances_to(net, dest, weight, allow);
  return path_from_distances(net, source, dest, dist, weight, allow);
}

PathResult static_shortest_path(const RoadNetwork& net, NodeId source, NodeId dest, PathWeight weight) {
  return shortest_path(net, source, dest, [&](EdgeId e) { return static_weight(net.edge(e), weight); });
}

const std::vector<double>& DistanceOracle::to(NodeId dest) {
  auto it = cache_.find(dest);
  if (it == cache_.end()) {
    const RoadNetwork& net = *net_;
    it = cache_.emplace(dest, distances_to(net, dest, [&net](EdgeId e) { return net.edge(e).length; })).first;
  }
  return it->second;
}

PathResult DistanceOracle::path(NodeId from, NodeId to) {
  const RoadNetwork& net = *net_;
  return path_from_distances(net, from, to, this->to(to), [&net](EdgeId e) { return net.edge(e).length; });
}

}  // namespace rmarl
