#include "rmarl/reach/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace rmarl {

int RouteGraph::index_of(NodeId n) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), n);
  if (it == nodes.end() || *it != n) return -1;
  return static_cast<int>(it - nodes.begin());
}

std::vector<std::vector<int>> RouteGraph::out_lists() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out[static_cast<std::size_t>(index_of(edges[i].from))].push_back(static_cast<int>(i));
  }
  return out;
}

bool ReachabilityGraph::has_cutting(EdgeId e) const { return std::binary_search(cutting.begin(), cutting.end(), e); }

std::vector<double> route_distances(const RouteGraph& g) {
  std::vector<double> dist(g.nodes.size(), kInf);
  const int s = g.index_of(g.source);
  if (s < 0) return dist;
  const auto out = g.out_lists();
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(s)] = 0.0;
  heap.emplace(0.0, s);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (int ei : out[static_cast<std::size_t>(u)]) {
      const RouteEdge& e = g.edges[static_cast<std::size_t>(ei)];
      const auto v = static_cast<std::size_t>(g.index_of(e.to));
      if (d + e.weight < dist[v]) {
        dist[v] = d + e.weight;
        heap.emplace(dist[v], static_cast<int>(v));
      }
    }
  }
  return dist;
}

RoutePath route_shortest_path(const RouteGraph& g) {
  RoutePath out;
  const int s = g.index_of(g.source);
  const int d = g.index_of(g.dest);
  if (s < 0 || d < 0) return out;

  // Reverse distances to dest so the path can be extracted greedily with the tie rule.
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<int>> in(n);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    in[static_cast<std::size_t>(g.index_of(g.edges[i].to))].push_back(static_cast<int>(i));
  }
  std::vector<double> to_dest(n, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  to_dest[static_cast<std::size_t>(d)] = 0.0;
  heap.emplace(0.0, d);
  while (!heap.empty()) {
    const auto [c, v] = heap.top();
    heap.pop();
    if (c > to_dest[static_cast<std::size_t>(v)]) continue;
    for (int ei : in[static_cast<std::size_t>(v)]) {
      const RouteEdge& e = g.edges[static_cast<std::size_t>(ei)];
      const auto u = static_cast<std::size_t>(g.index_of(e.from));
      if (c + e.weight < to_dest[u]) {
        to_dest[u] = c + e.weight;
        heap.emplace(to_dest[u], static_cast<int>(u));
      }
    }
  }
  if (!std::isfinite(to_dest[static_cast<std::size_t>(s)])) return out;

  const auto outl = g.out_lists();
  out.found = true;
  out.weight = to_dest[static_cast<std::size_t>(s)];
  int u = s;
  out.nodes.push_back(g.nodes[static_cast<std::size_t>(u)]);
  while (u != d) {
    const double du = to_dest[static_cast<std::size_t>(u)];
    const double tol = 1e-9 * std::max(1.0, du);
    int best = -1;
    for (int ei : outl[static_cast<std::size_t>(u)]) {
      const RouteEdge& e = g.edges[static_cast<std::size_t>(ei)];
      const int v = g.index_of(e.to);
      const double dv = to_dest[static_cast<std::size_t>(v)];
      if (!std::isfinite(dv) || dv >= du) continue;
      if (std::abs(e.weight + dv - du) <= tol && (best < 0 || v < best)) best = v;
    }
    if (best < 0) throw std::logic_error("route path extraction failed");
    u = best;
    out.nodes.push_back(g.nodes[static_cast<std::size_t>(u)]);
  }
  return out;
}

std::vector<RegionId> regions_between(const Partition& part, RegionId from, RegionId to) {
  const int m = part.num_regions();
  std::vector<char> useful(static_cast<std::size_t>(m), 0);
  std::vector<char> on_path(static_cast<std::size_t>(m), 0);
  std::vector<RegionId> stack;
  // Enumerate simple region paths; every region on a path that ends at `to` is kept.
  std::function<void(RegionId)> dfs = [&](RegionId r) {
    stack.push_back(r);
    on_path[static_cast<std::size_t>(r)] = 1;
    if (r == to) {
      for (RegionId x : stack) useful[static_cast<std::size_t>(x)] = 1;
    } else {
      for (RegionId nx : part.successors(r)) {
        if (!on_path[static_cast<std::size_t>(nx)]) dfs(nx);
      }
    }
    on_path[static_cast<std::size_t>(r)] = 0;
    stack.pop_back();
  };
  dfs(from);
  std::vector<RegionId> out;
  for (RegionId r = 0; r < m; ++r) {
    if (useful[static_cast<std::size_t>(r)]) out.push_back(r);
  }
  return out;
}

ConnectionGraph build_connection_graph(const RoadNetwork& net, const Partition& part, DistanceOracle& dist,
                                       NodeId source, NodeId dest) {
  if (!net.valid_node(source) || !net.valid_node(dest)) throw std::out_of_range("trip node out of range");
  ConnectionGraph cg;
  cg.source = source;
  cg.dest = dest;
  const RegionId rs = part.region_of(source);
  const RegionId rd = part.region_of(dest);

  std::set<NodeId> nodes{source, dest};
  const auto add_virtual = [&](NodeId a, NodeId b) {
    if (a == b) return;
    const double w = dist.distance(a, b);
    if (std::isfinite(w)) cg.edges.push_back(RouteEdge{a, b, w, kNoEdge});
  };

  if (rs == rd) {
    cg.regions = {rs};
    add_virtual(source, dest);
  } else {
    cg.regions = regions_between(part, rs, rd);
    if (cg.regions.empty()) {
      throw NoPathError("destination region " + std::to_string(rd) + " unreachable from region " + std::to_string(rs));
    }
    for (RegionId r : cg.regions) {
      const auto& boundary = part.boundary_nodes(r);
      nodes.insert(boundary.begin(), boundary.end());
      for (NodeId a : boundary) {
        for (NodeId b : boundary) add_virtual(a, b);
      }
      if (r == rs) {
        for (NodeId b : boundary) add_virtual(source, b);
      }
      if (r == rd) {
        for (NodeId b : boundary) add_virtual(b, dest);
      }
    }
    for (EdgeId e : part.all_cutting_edges()) {
      const Edge& ed = net.edge(e);
      const RegionId a = part.region_of(ed.from);
      const RegionId b = part.region_of(ed.to);
      if (std::binary_search(cg.regions.begin(), cg.regions.end(), a) &&
          std::binary_search(cg.regions.begin(), cg.regions.end(), b)) {
        cg.edges.push_back(RouteEdge{ed.from, ed.to, ed.length, e});
      }
    }
  }
  cg.nodes.assign(nodes.begin(), nodes.end());
  for (NodeId n : cg.nodes) cg.node_region.push_back(part.region_of(n));
  // Deterministic edge order: by (from, to, real edge).
  std::sort(cg.edges.begin(), cg.edges.end(), [](const RouteEdge& x, const RouteEdge& y) {
    if (x.from != y.from) return x.from < y.from;
    if (x.to != y.to) return x.to < y.to;
    return x.real_edge < y.real_edge;
  });
  cg.edges.erase(std::unique(cg.edges.begin(), cg.edges.end(),
                             [](const RouteEdge& x, const RouteEdge& y) {
                               return x.from == y.from && x.to == y.to && x.real_edge == y.real_edge;
                             }),
                 cg.edges.end());
  return cg;
}

namespace {

RegionId region_at(const RouteGraph& g, NodeId n) { return g.node_region[static_cast<std::size_t>(g.index_of(n))]; }

// Shortest path with region revisits spliced out through same-region edges.
std::vector<NodeId> canonical_path(const RouteGraph& g, const std::vector<NodeId>& path) {
  std::vector<NodeId> p = path;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < p.size() && !changed; ++i) {
      const RegionId r = region_at(g, p[i]);
      for (std::size_t j = p.size(); j-- > i + 1;) {
        if (region_at(g, p[j]) != r) continue;
        bool left = false;
        for (std::size_t k = i + 1; k < j; ++k) left |= region_at(g, p[k]) != r;
        if (!left) break;
        const bool direct = std::any_of(g.edges.begin(), g.edges.end(),
                                        [&](const RouteEdge& e) { return e.from == p[i] && e.to == p[j]; });
        if (!direct) continue;
        p.erase(p.begin() + static_cast<std::ptrdiff_t>(i) + 1, p.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return p;
}

}  // namespace

ReachabilityGraph dag_convert(const ConnectionGraph& cg) {
  const auto best = route_shortest_path(cg);
  if (!best.found) throw NoPathError("connection graph has no source -> dest path");
  const auto dist = route_distances(cg);
  const auto d_of = [&](NodeId n) { return dist[static_cast<std::size_t>(cg.index_of(n))]; };

  // Region ranking: regions on the shortest path by the distance at which the
  // path first enters them, other regions by their closest node.
  const auto path = canonical_path(cg, best.nodes);
  std::map<RegionId, std::pair<double, int>> key;  // region -> (distance, 0 on path / 1 off path)
  for (NodeId n : path) {
    const RegionId r = region_at(cg, n);
    if (!key.count(r)) key[r] = {d_of(n), 0};
  }
  for (std::size_t i = 0; i < cg.nodes.size(); ++i) {
    const RegionId r = cg.node_region[i];
    auto it = key.find(r);
    if (it == key.end()) {
      key[r] = {dist[i], 1};
    } else if (it->second.second == 1) {
      it->second.first = std::min(it->second.first, dist[i]);
    }
  }
  std::vector<std::tuple<double, int, RegionId>> order;
  for (const auto& [r, k] : key) order.emplace_back(k.first, k.second, r);
  std::sort(order.begin(), order.end());
  std::map<RegionId, int> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[std::get<2>(order[i])] = static_cast<int>(i);

  std::vector<RouteEdge> kept;
  for (const RouteEdge& e : cg.edges) {
    const double du = d_of(e.from);
    const double dv = d_of(e.to);
    if (!std::isfinite(du) || !std::isfinite(dv) || !(du < dv)) continue;
    const RegionId ru = region_at(cg, e.from);
    const RegionId rv = region_at(cg, e.to);
    if (ru != rv && rank[ru] >= rank[rv]) continue;
    kept.push_back(e);
  }

  // Drop edges that cannot be on a source -> dest path.
  const std::size_t n = cg.nodes.size();
  std::vector<char> fwd(n, 0);
  std::vector<char> bwd(n, 0);
  fwd[static_cast<std::size_t>(cg.index_of(cg.source))] = 1;
  bwd[static_cast<std::size_t>(cg.index_of(cg.dest))] = 1;
  for (bool grew = true; grew;) {
    grew = false;
    for (const RouteEdge& e : kept) {
      const auto u = static_cast<std::size_t>(cg.index_of(e.from));
      const auto v = static_cast<std::size_t>(cg.index_of(e.to));
      if (fwd[u] && !fwd[v]) fwd[v] = grew = true;
      if (bwd[v] && !bwd[u]) bwd[u] = grew = true;
    }
  }

  ReachabilityGraph rg;
  static_cast<RouteGraph&>(rg) = cg;
  rg.edges.clear();
  for (const RouteEdge& e : kept) {
    if (fwd[static_cast<std::size_t>(cg.index_of(e.from))] && bwd[static_cast<std::size_t>(cg.index_of(e.to))]) {
      rg.edges.push_back(e);
      if (e.real_edge != kNoEdge) rg.cutting.push_back(e.real_edge);
    }
  }
  std::sort(rg.cutting.begin(), rg.cutting.end());
  return rg;
}

std::vector<EdgeId> valid_actions(const ReachabilityGraph& rg, const Partition& part, RegionId region,
                                  NodeId current) {
  std::vector<EdgeId> out;
  if (region == part.region_of(rg.dest)) return out;
  const int start = rg.index_of(current);
  if (start < 0) return out;
  std::vector<char> seen(rg.nodes.size(), 0);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = 1;
  const auto outl = rg.out_lists();
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int ei : outl[static_cast<std::size_t>(u)]) {
      const RouteEdge& e = rg.edges[static_cast<std::size_t>(ei)];
      if (e.real_edge != kNoEdge) continue;  // stay inside the region
      const int v = rg.index_of(e.to);
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  for (const RouteEdge& e : rg.edges) {
    if (e.real_edge == kNoEdge || part.region_of(e.from) != region) continue;
    if (seen[static_cast<std::size_t>(rg.index_of(e.from))]) out.push_back(e.real_edge);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<bool> action_mask(const Partition& part, RegionId region, const std::vector<EdgeId>& valid) {
  const auto& cuts = part.cutting_edges(region);
  std::vector<bool> mask(cuts.size(), false);
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    mask[j] = std::find(valid.begin(), valid.end(), cuts[j]) != valid.end();
  }
  return mask;
}

std::string to_debug_edge_list(const RouteGraph& g, const RoadNetwork& net) {
  std::string out = "# abstract route graph: source " + std::to_string(g.source) + " dest " + std::to_string(g.dest) + "\n";
  char buf[160];
  for (NodeId n : g.nodes) {
    std::snprintf(buf, sizeof(buf), "node %d %.17g %.17g\n", n, net.node(n).x, net.node(n).y);
    out += buf;
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const RouteEdge& e = g.edges[i];
    const double speed = e.real_edge == kNoEdge ? 1.0 : net.edge(e.real_edge).max_speed;
    const int cap = e.real_edge == kNoEdge ? 1 : net.edge(e.real_edge).capacity;
    std::snprintf(buf, sizeof(buf), "edge %zu %d %d %.17g %.17g %d\n", i, e.from, e.to, e.weight, speed, cap);
    out += buf;
  }
  return out;
}

}  // namespace rmarl
