#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rmarl {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using RegionId = std::int32_t;
using VehicleId = std::int32_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr EdgeId kNoEdge = -1;
inline constexpr RegionId kNoRegion = -1;

struct Node {
  NodeId id = kNoNode;
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  bool operator==(const Node&) const = default;
};

struct Edge {
  EdgeId id = kNoEdge;
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  double length = 0.0;     // meters
  double max_speed = 0.0;  // m/s
  int capacity = 1;        // vehicles

  double free_flow_time() const { return length / max_speed; }
  bool operator==(const Edge&) const = default;
};

/// Raised by the edge-list and partition loaders; carries the 1-based line
/// number of the offending record (0 when the error is not line-specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

/// Directed road graph. Node and edge ids are dense and equal to their index.
/// Immutable after construction.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const Edge& edge(EdgeId id) const { return edges_.at(static_cast<std::size_t>(id)); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeId> out_edges(NodeId n) const;
  std::span<const EdgeId> in_edges(NodeId n) const;

  /// Lowest-id edge u -> v, or kNoEdge.
  EdgeId find_edge(NodeId u, NodeId v) const;

  bool valid_node(NodeId n) const { return n >= 0 && static_cast<std::size_t>(n) < nodes_.size(); }

  const BoundingBox& bounds() const { return bounds_; }
  double max_speed() const { return max_speed_; }

  bool operator==(const RoadNetwork& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<EdgeId> out_list_;
  std::vector<std::size_t> in_offsets_;
  std::vector<EdgeId> in_list_;
  BoundingBox bounds_;
  double max_speed_ = 0.0;
};

/// Parses `node <id> <x> <y>` / `edge <id> <from> <to> <length> <max_speed>
/// <capacity>` records; `#` starts a comment. Ids may be sparse; they are
/// remapped to dense ranges in ascending order of the original id.
RoadNetwork load_network(std::string_view text);
RoadNetwork load_network_file(const std::string& path);

std::string to_edge_list(const RoadNetwork& network);
void save_network_file(const RoadNetwork& network, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace rmarl
