#include "pfmm/fixtures.hpp"

namespace pfmm::fixtures {

using roadnet::EdgeId;
using roadnet::EdgeSpec;
using roadnet::Node;
using roadnet::NodeId;

geo::GeoPoint at_meters(double x, double y) { return geo::make_projection(kReference).unproject({x, y}); }

namespace {

void add_street(std::vector<EdgeSpec>& edges, std::uint64_t street, NodeId a, NodeId b,
                const std::vector<geo::GeoPoint>& geometry, bool oneway) {
  const EdgeId fwd{2 * street};
  const EdgeId rev{2 * street + 1};
  edges.push_back({fwd, a, b, geometry, oneway ? std::nullopt : std::optional<EdgeId>(rev)});
  if (!oneway) edges.push_back({rev, b, a, {geometry.rbegin(), geometry.rend()}, fwd});
}

}  // namespace

roadnet::RoadNetwork grid_network(std::size_t blocks, double block_length) {
  const std::size_t side = blocks + 1;
  std::vector<Node> nodes;
  auto node_at = [&](std::size_t i, std::size_t j) { return NodeId{j * side + i}; };
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      nodes.push_back({node_at(i, j), at_meters(static_cast<double>(i) * block_length,
                                                 static_cast<double>(j) * block_length)});
    }
  }
  std::vector<EdgeSpec> edges;
  std::uint64_t street = 0;
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const auto& here = nodes[static_cast<std::size_t>(roadnet::value(node_at(i, j)))];
      if (i + 1 < side) {
        const auto& east = nodes[static_cast<std::size_t>(roadnet::value(node_at(i + 1, j)))];
        add_street(edges, street++, here.id, east.id, {here.location, east.location}, false);
      }
      if (j + 1 < side) {
        const auto& north = nodes[static_cast<std::size_t>(roadnet::value(node_at(i, j + 1)))];
        add_street(edges, street++, here.id, north.id, {here.location, north.location}, false);
      }
    }
  }
  return roadnet::build_network(std::move(nodes), std::move(edges));
}

roadnet::RoadNetwork y_junction() {
  std::vector<Node> nodes{{NodeId{0}, at_meters(-200, 0)},
                          {NodeId{1}, at_meters(0, 0)},
                          {NodeId{2}, at_meters(200, 10)},
                          {NodeId{3}, at_meters(200, -10)}};
  std::vector<EdgeSpec> edges;
  add_street(edges, 0, NodeId{0}, NodeId{1}, {nodes[0].location, nodes[1].location}, true);
  add_street(edges, 1, NodeId{1}, NodeId{2}, {nodes[1].location, at_meters(10, 10), nodes[2].location}, true);
  add_street(edges, 2, NodeId{1}, NodeId{3}, {nodes[1].location, at_meters(10, -10), nodes[3].location}, true);
  return roadnet::build_network(std::move(nodes), std::move(edges));
}

trajectory::Trajectory make_trajectory(const std::vector<Fix>& fixes) {
  std::vector<trajectory::GpsPoint> pts;
  for (const auto& f : fixes) pts.push_back({at_meters(f.x, f.y), f.bearing, f.t});
  return trajectory::Trajectory(std::move(pts));
}

trajectory::Trajectory y_fork_symmetric() {
  return make_trajectory({{0, -100, 0, 90}, {5, -50, 0, 90}, {10, 0, 0, 90}, {14, 40, 0, 90}});
}

trajectory::Trajectory y_fork_asymmetric() {
  return make_trajectory({{0, -100, 0, 90}, {5, -50, 0, 90}, {10, 0, 0, 90}, {16, 60, 5, 90}});
}

trajectory::Trajectory y_left_continuation() {
  return make_trajectory({{0, -100, 0, 90}, {5, -50, 0, 90}, {10, 0, 0, 90}, {15, 50, 10, 90}, {20, 100, 10, 90}});
}

}  // namespace pfmm::fixtures
