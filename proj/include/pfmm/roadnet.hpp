#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pfmm/geo.hpp"
#include "pfmm/random.hpp"

namespace pfmm::roadnet {

enum class NodeId : std::uint64_t {};
enum class EdgeId : std::uint64_t {};

constexpr std::uint64_t value(NodeId id) noexcept { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t value(EdgeId id) noexcept { return static_cast<std::uint64_t>(id); }

std::string to_string(NodeId id);
std::string to_string(EdgeId id);

// Endpoint and reverse-geometry tolerance used during validation.
inline constexpr double kEndpointToleranceMeters = 0.5;
inline constexpr double kDefaultGridCellMeters = 50.0;

struct Node {
  NodeId id{};
  geo::GeoPoint location;
};

// Edge as supplied to build_network. Length is derived.
struct EdgeSpec {
  EdgeId id{};
  NodeId from{};
  NodeId to{};
  std::vector<geo::GeoPoint> geometry;
  std::optional<EdgeId> reverse_of;
};

// A directed road segment. Immutable once the owning network is built.
struct Edge {
  EdgeId id{};
  NodeId from{};
  NodeId to{};
  std::vector<geo::GeoPoint> geometry;
  std::optional<EdgeId> reverse_of;
  double length = 0.0;

  // Geometry in the network's planar frame and the running arc length at
  // each vertex (cumulative.front() == 0, cumulative.back() == length).
  std::vector<geo::PlanarPoint> planar;
  std::vector<double> cumulative;
};

// A point on the network. The direction of travel is the edge's own.
struct NetworkPosition {
  EdgeId edge{};
  double offset = 0.0;

  friend bool operator==(const NetworkPosition&, const NetworkPosition&) = default;
};

struct NetworkStep {
  NetworkPosition end;
  // Edges fully exited during the move, in order. When non-empty the first
  // entry is the starting edge and the chain continues into end.edge.
  std::vector<EdgeId> traversed;
  // The move stopped at a node with no admissible out-edge while distance
  // remained.
  bool dead_end = false;
};

struct EdgeMatch {
  EdgeId edge{};
  NetworkPosition position;
  double dist = 0.0;
};

// Uniform grid over projected edge segments. Each segment is registered in
// every cell its bounding box overlaps.
class SpatialGrid {
 public:
  struct SegmentRef {
    std::uint32_t edge_index;
    std::uint32_t segment;
  };

  SpatialGrid() = default;
  SpatialGrid(std::span<const Edge> edges, double cell_size);

  double cell_size() const noexcept { return cell_size_; }

  // Calls visit(SegmentRef) for every registration in cells intersecting the
  // axis-aligned box around center. A segment may be visited more than once.
  template <typename Visit>
  void for_each_near(const geo::PlanarPoint& center, double radius, Visit&& visit) const {
    const auto [cx0, cy0] = cell_of({center.x - radius, center.y - radius});
    const auto [cx1, cy1] = cell_of({center.x + radius, center.y + radius});
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        auto it = cells_.find(key(cx, cy));
        if (it == cells_.end()) continue;
        for (const SegmentRef& ref : it->second) visit(ref);
      }
    }
  }

  std::size_t registration_count() const noexcept;
  const std::unordered_map<std::uint64_t, std::vector<SegmentRef>>& cells() const noexcept { return cells_; }

  std::pair<std::int64_t, std::int64_t> cell_of(const geo::PlanarPoint& p) const noexcept;
  static std::uint64_t key(std::int64_t cx, std::int64_t cy) noexcept;

 private:
  double cell_size_ = kDefaultGridCellMeters;
  std::unordered_map<std::uint64_t, std::vector<SegmentRef>> cells_;
};

class RoadNetwork;

// Validates the inputs and builds adjacency, planar geometry and the spatial
// index. All validation problems are reported together in a NetworkError.
RoadNetwork build_network(std::vector<Node> nodes, std::vector<EdgeSpec> edges,
                          double grid_cell = kDefaultGridCellMeters);

/// Directed road graph with geometry in one shared planar frame.
///
/// The projection origin is the centre of the bounding box of all node and
/// geometry coordinates. Instances are immutable after construction and can
/// be shared freely between readers.
class RoadNetwork {
 public:
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const geo::LocalProjection& projection() const noexcept { return projection_; }
  const SpatialGrid& spatial_index() const noexcept { return grid_; }

  bool has_node(NodeId id) const noexcept { return node_index_.contains(id); }
  bool has_edge(EdgeId id) const noexcept { return edge_index_.contains(id); }
  // Throw std::out_of_range naming the id when unknown.
  const Node& node(NodeId id) const;
  const Edge& edge(EdgeId id) const;
  std::size_t edge_index(EdgeId id) const;

  // Edges leaving node, ordered by departure heading (ties by id). Throws on
  // unknown node.
  std::span<const EdgeId> out_edges(NodeId node) const;

  std::vector<EdgeMatch> edges_within_radius(const geo::GeoPoint& p, double radius) const;
  std::vector<EdgeMatch> edges_within_radius(const geo::PlanarPoint& p, double radius) const;

  geo::GeoPoint position_to_point(const NetworkPosition& pos) const;
  geo::PlanarPoint position_to_planar(const NetworkPosition& pos) const;
  // Heading of the edge segment containing pos, degrees clockwise from north.
  double heading_at(const NetworkPosition& pos) const;

  // Concatenated geometry of a connected edge sequence, junction vertices
  // not repeated. Throws PathError at the first break.
  std::vector<geo::GeoPoint> path_geometry(std::span<const EdgeId> path) const;
  std::vector<geo::PlanarPoint> path_planar(std::span<const EdgeId> path) const;

  // Total length of the listed edges (no connectivity requirement).
  double total_length(std::span<const EdgeId> edges) const;

 private:
  friend RoadNetwork build_network(std::vector<Node>, std::vector<EdgeSpec>, double);
  RoadNetwork(geo::LocalProjection projection) : projection_(projection) {}

  std::size_t segment_at(const Edge& e, double offset) const noexcept;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> node_index_;
  std::unordered_map<EdgeId, std::size_t> edge_index_;
  std::unordered_map<NodeId, std::vector<EdgeId>> out_adjacency_;
  geo::LocalProjection projection_;
  SpatialGrid grid_;
};

std::span<const EdgeId> out_edges(const RoadNetwork& net, NodeId node);

// Out-edges a vehicle may take after leaving `arriving` at its to-node. The
// reverse of `arriving` is dropped unless it is the only option or U-turns
// are allowed.
std::vector<EdgeId> admissible_next(const RoadNetwork& net, const Edge& arriving, bool allow_uturn);

/// Moves `dist` meters forward along the directed network.
///
/// At each node the next edge is drawn uniformly from admissible_next(). A
/// node without out-edges absorbs the remaining distance and sets dead_end.
/// Landing exactly on an edge's end keeps the position on that edge.
NetworkStep advance(const RoadNetwork& net, const NetworkPosition& pos, double dist, Rng& rng,
                    bool allow_uturn = false);
NetworkStep advance(const RoadNetwork& net, const NetworkPosition& pos, double dist, StreamRng& rng,
                    bool allow_uturn = false);

}  // namespace pfmm::roadnet
