#include "rmarl/graph/road_network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rmarl {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const auto n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i)) {
      throw std::invalid_argument("node ids must be dense and equal to their index");
    }
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.id != static_cast<EdgeId>(i)) {
      throw std::invalid_argument("edge ids must be dense and equal to their index");
    }
    if (!valid_node(e.from) || !valid_node(e.to)) {
      throw std::invalid_argument("edge " + std::to_string(e.id) + " references a missing node");
    }
    if (!(e.length > 0.0) || !(e.max_speed > 0.0) || e.capacity < 1) {
      throw std::invalid_argument("edge " + std::to_string(e.id) +
                                  " needs length > 0, max_speed > 0, capacity >= 1");
    }
    max_speed_ = std::max(max_speed_, e.max_speed);
  }

  // CSR adjacency, edges listed in ascending id within each node.
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const Edge& e : edges_) {
    ++out_offsets_[static_cast<std::size_t>(e.from) + 1];
    ++in_offsets_[static_cast<std::size_t>(e.to) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_list_.resize(edges_.size());
  in_list_.resize(edges_.size());
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (const Edge& e : edges_) {
    out_list_[out_fill[static_cast<std::size_t>(e.from)]++] = e.id;
    in_list_[in_fill[static_cast<std::size_t>(e.to)]++] = e.id;
  }

  if (!nodes_.empty()) {
    bounds_ = {nodes_[0].x, nodes_[0].y, nodes_[0].x, nodes_[0].y};
    for (const Node& v : nodes_) {
      bounds_.min_x = std::min(bounds_.min_x, v.x);
      bounds_.min_y = std::min(bounds_.min_y, v.y);
      bounds_.max_x = std::max(bounds_.max_x, v.x);
      bounds_.max_y = std::max(bounds_.max_y, v.y);
    }
  }
}

std::span<const EdgeId> RoadNetwork::out_edges(NodeId n) const {
  const auto i = static_cast<std::size_t>(n);
  return {out_list_.data() + out_offsets_.at(i), out_offsets_.at(i + 1) - out_offsets_.at(i)};
}

std::span<const EdgeId> RoadNetwork::in_edges(NodeId n) const {
  const auto i = static_cast<std::size_t>(n);
  return {in_list_.data() + in_offsets_.at(i), in_offsets_.at(i + 1) - in_offsets_.at(i)};
}

EdgeId RoadNetwork::find_edge(NodeId u, NodeId v) const {
  for (EdgeId e : out_edges(u)) {
    if (edges_[static_cast<std::size_t>(e)].to == v) return e;
  }
  return kNoEdge;
}

namespace {

struct RawEdge {
  long long id;
  long long from;
  long long to;
  double length;
  double max_speed;
  long long capacity;
  std::size_t line;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long parse_int(std::string_view s, std::size_t line, const char* field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("bad integer for ") + field + ": '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s, std::size_t line, const char* field) {
  // std::from_chars for double is incomplete on some toolchains; strtod is fine here.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("bad number for ") + field + ": '" + tmp + "'");
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RoadNetwork load_network(std::string_view text) {
  std::map<long long, std::pair<Node, std::size_t>> raw_nodes;
  std::vector<RawEdge> raw_edges;
  std::map<long long, std::size_t> edge_lines;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto f = split_fields(line);
    if (f.empty()) continue;

    if (f[0] == "node") {
      if (f.size() != 4) throw ParseError(line_no, "node record needs 3 fields: <id> <x> <y>");
      const long long id = parse_int(f[1], line_no, "node id");
      Node v{kNoNode, parse_double(f[2], line_no, "x"), parse_double(f[3], line_no, "y")};
      if (!raw_nodes.emplace(id, std::make_pair(v, line_no)).second) {
        throw ParseError(line_no, "duplicate node id " + std::to_string(id));
      }
    } else if (f[0] == "edge") {
      if (f.size() != 7) {
        throw ParseError(line_no, "edge record needs 6 fields: <id> <from> <to> <length> <max_speed> <capacity>");
      }
      RawEdge e{parse_int(f[1], line_no, "edge id"),
                parse_int(f[2], line_no, "from"),
                parse_int(f[3], line_no, "to"),
                parse_double(f[4], line_no, "length"),
                parse_double(f[5], line_no, "max_speed"),
                parse_int(f[6], line_no, "capacity"),
                line_no};
      if (!(e.length > 0.0)) throw ParseError(line_no, "edge length must be positive");
      if (!(e.max_speed > 0.0)) throw ParseError(line_no, "edge max_speed must be positive");
      if (e.capacity < 1) throw ParseError(line_no, "edge capacity must be >= 1");
      if (!edge_lines.emplace(e.id, line_no).second) {
        throw ParseError(line_no, "duplicate edge id " + std::to_string(e.id));
      }
      raw_edges.push_back(e);
    } else {
      throw ParseError(line_no, "unknown record type '" + std::string(f[0]) + "'");
    }
  }

  std::map<long long, NodeId> node_map;
  std::vector<Node> nodes;
  nodes.reserve(raw_nodes.size());
  for (auto& [orig, rec] : raw_nodes) {
    const auto dense = static_cast<NodeId>(nodes.size());
    node_map[orig] = dense;
    Node v = rec.first;
    v.id = dense;
    nodes.push_back(v);
  }

  std::sort(raw_edges.begin(), raw_edges.end(),
            [](const RawEdge& a, const RawEdge& b) { return a.id < b.id; });
  std::vector<Edge> edges;
  edges.reserve(raw_edges.size());
  for (const RawEdge& r : raw_edges) {
    auto from = node_map.find(r.from);
    auto to = node_map.find(r.to);
    if (from == node_map.end()) throw ParseError(r.line, "unknown node id " + std::to_string(r.from));
    if (to == node_map.end()) throw ParseError(r.line, "unknown node id " + std::to_string(r.to));
    edges.push_back(Edge{static_cast<EdgeId>(edges.size()), from->second, to->second, r.length,
                         r.max_speed, static_cast<int>(r.capacity)});
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

RoadNetwork load_network_file(const std::string& path) { return load_network(read_text_file(path)); }

std::string to_edge_list(const RoadNetwork& network) {
  std::string out = "# nodes: node <id> <x> <y>\n";
  for (const Node& v : network.nodes()) {
    out += "node " + std::to_string(v.id) + " " + fmt_double(v.x) + " " + fmt_double(v.y) + "\n";
  }
  out += "# edges: edge <id> <from> <to> <length> <max_speed> <capacity>\n";
  for (const Edge& e : network.edges()) {
    out += "edge " + std::to_string(e.id) + " " + std::to_string(e.from) + " " + std::to_string(e.to) + " " +
           fmt_double(e.length) + " " + fmt_double(e.max_speed) + " " + std::to_string(e.capacity) + "\n";
  }
  return out;
}

void save_network_file(const RoadNetwork& network, const std::string& path) {
  write_text_file(path, to_edge_list(network));
}

}  // namespace rmarl
