#include "rmarl/graph/partition.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rmarl {

Partition::Partition(const RoadNetwork& net, std::vector<RegionId> region_of) : region_of_(std::move(region_of)) {
  if (region_of_.size() != net.num_nodes()) {
    throw std::invalid_argument("partition covers " + std::to_string(region_of_.size()) + " nodes, network has " +
                                std::to_string(net.num_nodes()));
  }
  RegionId max_region = -1;
  for (RegionId r : region_of_) {
    if (r < 0) throw std::invalid_argument("negative region id");
    max_region = std::max(max_region, r);
  }
  const auto m = static_cast<std::size_t>(max_region + 1);
  cutting_.assign(m, {});
  boundary_.assign(m, {});
  members_.assign(m, {});
  succ_.assign(m, {});
  action_index_.assign(net.num_edges(), -1);

  for (std::size_t v = 0; v < region_of_.size(); ++v) {
    members_[static_cast<std::size_t>(region_of_[v])].push_back(static_cast<NodeId>(v));
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (members_[r].empty()) throw std::invalid_argument("region " + std::to_string(r) + " has no nodes");
  }

  std::vector<std::set<NodeId>> boundary(m);
  std::vector<std::set<RegionId>> succ(m);
  for (const Edge& e : net.edges()) {
    const RegionId a = region_of_[static_cast<std::size_t>(e.from)];
    const RegionId b = region_of_[static_cast<std::size_t>(e.to)];
    if (a == b) continue;
    auto& list = cutting_[static_cast<std::size_t>(a)];
    action_index_[static_cast<std::size_t>(e.id)] = static_cast<int>(list.size());
    list.push_back(e.id);
    all_cutting_.push_back(e.id);
    boundary[static_cast<std::size_t>(a)].insert(e.from);
    boundary[static_cast<std::size_t>(b)].insert(e.to);
    succ[static_cast<std::size_t>(a)].insert(b);
  }
  for (std::size_t r = 0; r < m; ++r) {
    boundary_[r].assign(boundary[r].begin(), boundary[r].end());
    succ_[r].assign(succ[r].begin(), succ[r].end());
    max_actions_ = std::max(max_actions_, static_cast<int>(cutting_[r].size()));
  }
}

Partition load_partition(std::string_view text, const RoadNetwork& net) {
  std::vector<RegionId> region(net.num_nodes(), kNoRegion);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    long long node = 0;
    long long reg = 0;
    if (!(ss >> node)) {
      std::string rest;
      if (std::istringstream(line) >> rest) throw ParseError(line_no, "expected <node_id> <region_id>");
      continue;
    }
    if (!(ss >> reg)) throw ParseError(line_no, "expected <node_id> <region_id>");
    std::string extra;
    if (ss >> extra) throw ParseError(line_no, "trailing field '" + extra + "'");
    if (node < 0 || static_cast<std::size_t>(node) >= net.num_nodes()) {
      throw ParseError(line_no, "unknown node id " + std::to_string(node));
    }
    if (reg < 0) throw ParseError(line_no, "negative region id");
    if (region[static_cast<std::size_t>(node)] != kNoRegion) {
      throw ParseError(line_no, "node " + std::to_string(node) + " assigned twice");
    }
    region[static_cast<std::size_t>(node)] = static_cast<RegionId>(reg);
  }
  for (std::size_t v = 0; v < region.size(); ++v) {
    if (region[v] == kNoRegion) throw ParseError(0, "node " + std::to_string(v) + " has no region");
  }
  return Partition(net, std::move(region));
}

Partition load_partition_file(const std::string& path, const RoadNetwork& net) {
  return load_partition(read_text_file(path), net);
}

std::string to_partition_text(const Partition& p) {
  std::string out = "# <node_id> <region_id>\n";
  const auto& a = p.assignment();
  for (std::size_t v = 0; v < a.size(); ++v) out += std::to_string(v) + " " + std::to_string(a[v]) + "\n";
  return out;
}

long estimate_region_count(long total_edges, long agent_capacity) {
  if (total_edges <= 0 || agent_capacity <= 0) throw std::invalid_argument("edge counts must be positive");
  return (total_edges + agent_capacity - 1) / agent_capacity;
}

std::vector<int> grid_connector_lanes(int n) {
  std::set<int> lanes{std::min(1, n - 1), std::max(n - 2, 0)};
  return {lanes.begin(), lanes.end()};
}

GridNetwork generate_grid(const GridSpec& spec) {
  if (spec.regions_per_side < 1 || spec.nodes_per_region_side < 1) {
    throw std::invalid_argument("grid needs at least one region and one node per side");
  }
  if (!(spec.edge_length > 0.0) || !(spec.max_speed > 0.0) || spec.capacity < 1) {
    throw std::invalid_argument("grid edge attributes must be positive");
  }
  const int n = spec.nodes_per_region_side;
  const int side = spec.regions_per_side * n;
  const auto lanes = grid_connector_lanes(n);
  const auto is_lane = [&](int local) { return std::find(lanes.begin(), lanes.end(), local) != lanes.end(); };

  std::vector<Node> nodes;
  std::vector<RegionId> region;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      nodes.push_back(Node{grid_node(spec, row, col), col * spec.edge_length, row * spec.edge_length});
      region.push_back((row / n) * spec.regions_per_side + (col / n));
    }
  }

  std::vector<Edge> edges;
  const auto add_pair = [&](NodeId u, NodeId v) {
    for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
      edges.push_back(Edge{static_cast<EdgeId>(edges.size()), a, b, spec.edge_length, spec.max_speed, spec.capacity});
    }
  };
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const NodeId u = grid_node(spec, row, col);
      if (col + 1 < side) {
        const bool crosses = (col + 1) % n == 0;
        if (!crosses || is_lane(row % n)) add_pair(u, grid_node(spec, row, col + 1));
      }
      if (row + 1 < side) {
        const bool crosses = (row + 1) % n == 0;
        if (!crosses || is_lane(col % n)) add_pair(u, grid_node(spec, row + 1, col));
      }
    }
  }

  RoadNetwork net(std::move(nodes), std::move(edges));
  Partition part(net, std::move(region));
  return GridNetwork{std::move(net), std::move(part), spec};
}

namespace {

// Undirected neighbour lists with the number of directed edges joining each pair.
struct UndirectedView {
  std::vector<std::vector<std::pair<NodeId, int>>> adj;

  explicit UndirectedView(const RoadNetwork& net) : adj(net.num_nodes()) {
    std::vector<std::map<NodeId, int>> tmp(net.num_nodes());
    for (const Edge& e : net.edges()) {
      if (e.from == e.to) continue;
      ++tmp[static_cast<std::size_t>(e.from)][e.to];
      ++tmp[static_cast<std::size_t>(e.to)][e.from];
    }
    for (std::size_t v = 0; v < tmp.size(); ++v) adj[v].assign(tmp[v].begin(), tmp[v].end());
  }
};

std::vector<int> bfs_hops(const UndirectedView& g, const std::vector<NodeId>& sources) {
  std::vector<int> hop(g.adj.size(), -1);
  std::deque<NodeId> q;
  for (NodeId s : sources) {
    hop[static_cast<std::size_t>(s)] = 0;
    q.push_back(s);
  }
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (auto [v, w] : g.adj[static_cast<std::size_t>(u)]) {
      (void)w;
      if (hop[static_cast<std::size_t>(v)] < 0) {
        hop[static_cast<std::size_t>(v)] = hop[static_cast<std::size_t>(u)] + 1;
        q.push_back(v);
      }
    }
  }
  return hop;
}

long cut_size(const RoadNetwork& net, const std::vector<RegionId>& region) {
  long cut = 0;
  for (const Edge& e : net.edges()) {
    if (region[static_cast<std::size_t>(e.from)] != region[static_cast<std::size_t>(e.to)]) ++cut;
  }
  return cut;
}

// True when region `r` stays connected after removing `u` from it.
bool connected_without(const UndirectedView& g, const std::vector<RegionId>& region, RegionId r, NodeId u,
                       std::size_t region_size) {
  if (region_size <= 1) return false;
  NodeId start = kNoNode;
  for (auto [v, w] : g.adj[static_cast<std::size_t>(u)]) {
    (void)w;
    if (region[static_cast<std::size_t>(v)] == r) {
      start = v;
      break;
    }
  }
  if (start == kNoNode) return false;
  std::vector<char> seen(g.adj.size(), 0);
  seen[static_cast<std::size_t>(u)] = 1;
  seen[static_cast<std::size_t>(start)] = 1;
  std::deque<NodeId> q{start};
  std::size_t count = 1;
  while (!q.empty()) {
    const NodeId a = q.front();
    q.pop_front();
    for (auto [b, w] : g.adj[static_cast<std::size_t>(a)]) {
      (void)w;
      if (!seen[static_cast<std::size_t>(b)] && region[static_cast<std::size_t>(b)] == r) {
        seen[static_cast<std::size_t>(b)] = 1;
        ++count;
        q.push_back(b);
      }
    }
  }
  return count == region_size - 1;
}

struct Balance {
  std::size_t lower;
  std::size_t upper;
};

class Partitioner {
 public:
  Partitioner(const RoadNetwork& net, const UndirectedView& g, int m, Balance bal)
      : net_(net), g_(g), m_(m), bal_(bal) {}

  std::vector<RegionId> run(std::mt19937_64& rng) {
    const std::size_t n = net_.num_nodes();
    region_.assign(n, kNoRegion);
    size_.assign(static_cast<std::size_t>(m_), 0);

    // Farthest-point seeding from a random first seed.
    std::vector<NodeId> seeds{static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng))};
    while (static_cast<int>(seeds.size()) < m_) {
      const auto hop = bfs_hops(g_, seeds);
      int best_hop = -1;
      std::vector<NodeId> far;
      for (std::size_t v = 0; v < n; ++v) {
        if (hop[v] > best_hop) {
          best_hop = hop[v];
          far.clear();
        }
        if (hop[v] == best_hop) far.push_back(static_cast<NodeId>(v));
      }
      seeds.push_back(far[std::uniform_int_distribution<std::size_t>(0, far.size() - 1)(rng)]);
    }
    for (int r = 0; r < m_; ++r) assign(seeds[static_cast<std::size_t>(r)], r);

    grow();
    refine();
    rebalance();
    refine();
    return region_;
  }

 private:
  void assign(NodeId v, RegionId r) {
    const RegionId old = region_[static_cast<std::size_t>(v)];
    if (old != kNoRegion) --size_[static_cast<std::size_t>(old)];
    region_[static_cast<std::size_t>(v)] = r;
    ++size_[static_cast<std::size_t>(r)];
  }

  int links(NodeId v, RegionId r) const {
    int c = 0;
    for (auto [u, w] : g_.adj[static_cast<std::size_t>(v)]) {
      if (region_[static_cast<std::size_t>(u)] == r) c += w;
    }
    return c;
  }

  void grow() {
    std::size_t unassigned = 0;
    for (RegionId r : region_) unassigned += (r == kNoRegion);
    while (unassigned > 0) {
      std::vector<RegionId> order(static_cast<std::size_t>(m_));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](RegionId a, RegionId b) {
        return size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)];
      });
      bool progressed = false;
      for (RegionId r : order) {
        NodeId best = kNoNode;
        int best_links = -1;
        for (std::size_t v = 0; v < region_.size(); ++v) {
          if (region_[v] != r) continue;
          for (auto [u, w] : g_.adj[v]) {
            (void)w;
            if (region_[static_cast<std::size_t>(u)] != kNoRegion) continue;
            const int l = links(u, r);
            if (l > best_links || (l == best_links && u < best)) {
              best_links = l;
              best = u;
            }
          }
        }
        if (best != kNoNode) {
          assign(best, r);
          --unassigned;
          progressed = true;
          break;  // re-sort after every claim to keep sizes level
        }
      }
      if (!progressed) throw std::logic_error("region growth stalled");
    }
  }

  // Fiduccia-Mattheyses style passes: move the best-gain boundary node (gain may
  // be negative), lock it, and keep the prefix of moves with the best total gain.
  void refine() {
    const std::size_t n = region_.size();
    for (int pass = 0; pass < 32; ++pass) {
      std::vector<char> locked(n, 0);
      std::vector<std::pair<NodeId, RegionId>> moves;  // node, region it left
      long total = 0;
      long best_total = 0;
      std::size_t best_len = 0;
      for (std::size_t step = 0; step < n; ++step) {
        struct Candidate {
          int gain;
          NodeId v;
          RegionId to;
        };
        std::vector<Candidate> cands;
        for (std::size_t v = 0; v < n; ++v) {
          if (locked[v]) continue;
          const RegionId a = region_[v];
          if (size_[static_cast<std::size_t>(a)] <= bal_.lower) continue;
          std::set<RegionId> neighbours;
          for (auto [u, w] : g_.adj[v]) {
            (void)w;
            if (region_[static_cast<std::size_t>(u)] != a) neighbours.insert(region_[static_cast<std::size_t>(u)]);
          }
          const int own = links(static_cast<NodeId>(v), a);
          for (RegionId b : neighbours) {
            if (size_[static_cast<std::size_t>(b)] >= bal_.upper) continue;
            cands.push_back({links(static_cast<NodeId>(v), b) - own, static_cast<NodeId>(v), b});
          }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
          return x.gain != y.gain ? x.gain > y.gain : (x.v != y.v ? x.v < y.v : x.to < y.to);
        });
        bool applied = false;
        for (const Candidate& c : cands) {
          const RegionId a = region_[static_cast<std::size_t>(c.v)];
          if (!connected_without(g_, region_, a, c.v, size_[static_cast<std::size_t>(a)])) continue;
          assign(c.v, c.to);
          locked[static_cast<std::size_t>(c.v)] = 1;
          moves.emplace_back(c.v, a);
          total += c.gain;
          if (total > best_total) {
            best_total = total;
            best_len = moves.size();
          }
          applied = true;
          break;
        }
        if (!applied) break;
      }
      while (moves.size() > best_len) {
        assign(moves.back().first, moves.back().second);
        moves.pop_back();
      }
      if (best_total <= 0) break;
    }
  }

  bool balanced() const {
    const auto [lo, hi] = std::minmax_element(size_.begin(), size_.end());
    return *hi <= 2 * *lo;
  }

  // Move single nodes from large regions into the smallest region until max/min <= 2.
  void rebalance() {
    const std::size_t limit = region_.size() * static_cast<std::size_t>(m_) + 16;
    for (std::size_t iter = 0; iter < limit && !balanced(); ++iter) {
      const auto small = static_cast<RegionId>(std::min_element(size_.begin(), size_.end()) - size_.begin());
      NodeId best = kNoNode;
      int best_cost = 0;
      for (std::size_t v = 0; v < region_.size(); ++v) {
        const RegionId a = region_[v];
        if (a == small || size_[static_cast<std::size_t>(a)] <= size_[static_cast<std::size_t>(small)] + 1) continue;
        const int to_small = links(static_cast<NodeId>(v), small);
        if (to_small == 0) continue;
        const int cost = links(static_cast<NodeId>(v), a) - to_small;
        if (best != kNoNode && cost >= best_cost) continue;
        if (!connected_without(g_, region_, a, static_cast<NodeId>(v), size_[static_cast<std::size_t>(a)])) continue;
        best = static_cast<NodeId>(v);
        best_cost = cost;
      }
      if (best == kNoNode) break;
      assign(best, small);
    }
  }

  const RoadNetwork& net_;
  const UndirectedView& g_;
  int m_;
  Balance bal_;
  std::vector<RegionId> region_;
  std::vector<std::size_t> size_;
};

}  // namespace

Partition partition_network(const RoadNetwork& net, int regions, std::uint64_t seed) {
  const std::size_t n = net.num_nodes();
  if (regions < 1) throw std::invalid_argument("need at least one region");
  if (static_cast<std::size_t>(regions) > n) throw std::invalid_argument("more regions than nodes");

  const UndirectedView g(net);
  if (n > 0) {
    const auto hop = bfs_hops(g, {0});
    if (std::any_of(hop.begin(), hop.end(), [](int h) { return h < 0; })) {
      throw std::invalid_argument("network is not weakly connected");
    }
  }
  if (regions == 1) return Partition(net, std::vector<RegionId>(n, 0));

  const double avg = static_cast<double>(n) / regions;
  const auto lower = std::max<std::size_t>(1, static_cast<std::size_t>(avg * 2.0 / 3.0));
  const Balance bal{lower, std::max<std::size_t>(2 * lower, static_cast<std::size_t>(avg) + 1)};

  std::mt19937_64 rng(seed);
  std::vector<RegionId> best;
  long best_cut = -1;
  bool best_balanced = false;
  constexpr int kRestarts = 8;
  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    Partitioner p(net, g, regions, bal);
    auto assignment = p.run(rng);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(regions), 0);
    for (RegionId r : assignment) ++sizes[static_cast<std::size_t>(r)];
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    const bool ok = *hi <= 2 * *lo;
    const long cut = cut_size(net, assignment);
    if (best_cut < 0 || (ok && !best_balanced) || (ok == best_balanced && cut < best_cut)) {
      best = std::move(assignment);
      best_cut = cut;
      best_balanced = ok;
    }
  }
  if (!best_balanced) throw std::runtime_error("could not reach a balanced partition");

  // Canonical numbering: regions ordered by their smallest node id.
  std::vector<RegionId> remap(static_cast<std::size_t>(regions), kNoRegion);
  RegionId next = 0;
  for (RegionId& r : best) {
    auto& m = remap[static_cast<std::size_t>(r)];
    if (m == kNoRegion) m = next++;
    r = m;
  }
  return Partition(net, std::move(best));
}

}  // namespace rmarl
