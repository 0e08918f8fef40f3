#include "pfmm/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "pfmm/error.hpp"

namespace pfmm::roadnet {

std::string to_string(NodeId id) { return "node " + std::to_string(value(id)); }
std::string to_string(EdgeId id) { return "edge " + std::to_string(value(id)); }

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid::SpatialGrid(std::span<const Edge> edges, double cell_size) : cell_size_(cell_size) {
  for (std::size_t ei = 0; ei < edges.size(); ++ei) {
    const auto& pts = edges[ei].planar;
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const auto [x0, y0] = cell_of({std::min(pts[s].x, pts[s + 1].x), std::min(pts[s].y, pts[s + 1].y)});
      const auto [x1, y1] = cell_of({std::max(pts[s].x, pts[s + 1].x), std::max(pts[s].y, pts[s + 1].y)});
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::int64_t cy = y0; cy <= y1; ++cy) {
          cells_[key(cx, cy)].push_back(
              {static_cast<std::uint32_t>(ei), static_cast<std::uint32_t>(s)});
        }
      }
    }
  }
}

std::size_t SpatialGrid::registration_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [k, v] : cells_) n += v.size();
  return n;
}

std::pair<std::int64_t, std::int64_t> SpatialGrid::cell_of(const geo::PlanarPoint& p) const noexcept {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_size_))};
}

std::uint64_t SpatialGrid::key(std::int64_t cx, std::int64_t cy) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint32_t>(cy);
}

// ---------------------------------------------------------------------------
// build_network

namespace {

geo::GeoPoint bbox_centre(const std::vector<Node>& nodes, const std::vector<EdgeSpec>& edges) {
  double lat0 = std::numeric_limits<double>::infinity(), lat1 = -lat0;
  double lon0 = lat0, lon1 = -lat0;
  auto extend = [&](const geo::GeoPoint& p) {
    if (!geo::is_valid(p)) return;
    lat0 = std::min(lat0, p.lat);
    lat1 = std::max(lat1, p.lat);
    lon0 = std::min(lon0, p.lon);
    lon1 = std::max(lon1, p.lon);
  };
  for (const auto& n : nodes) extend(n.location);
  for (const auto& e : edges) {
    for (const auto& p : e.geometry) extend(p);
  }
  if (!std::isfinite(lat0)) throw NetworkError({"network has no valid coordinates"});
  return {0.5 * (lat0 + lat1), 0.5 * (lon0 + lon1)};
}

}  // namespace

RoadNetwork build_network(std::vector<Node> nodes, std::vector<EdgeSpec> specs, double grid_cell) {
  if (!(grid_cell > 0.0) || !std::isfinite(grid_cell)) {
    throw NetworkError({"grid cell size must be positive"});
  }
  if (nodes.empty()) throw NetworkError({"network has no nodes"});

  RoadNetwork net(geo::make_projection(bbox_centre(nodes, specs)));
  const auto& proj = net.projection_;
  std::vector<std::string> problems;

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (!geo::is_valid(n.location)) problems.push_back(to_string(n.id) + " has invalid coordinates");
    if (!net.node_index_.emplace(n.id, i).second) problems.push_back("duplicate " + to_string(n.id));
  }

  net.edges_.reserve(specs.size());
  std::unordered_set<EdgeId> seen;
  for (auto& spec : specs) {
    const std::string name = to_string(spec.id);
    if (!seen.insert(spec.id).second) {
      problems.push_back("duplicate " + name);
      continue;
    }
    bool ok = true;
    const Node* from = nullptr;
    const Node* to = nullptr;
    if (auto it = net.node_index_.find(spec.from); it != net.node_index_.end()) {
      from = &nodes[it->second];
    } else {
      problems.push_back(name + " references missing from-" + to_string(spec.from));
      ok = false;
    }
    if (auto it = net.node_index_.find(spec.to); it != net.node_index_.end()) {
      to = &nodes[it->second];
    } else {
      problems.push_back(name + " references missing to-" + to_string(spec.to));
      ok = false;
    }
    if (spec.geometry.size() < 2) {
      problems.push_back(name + " geometry has fewer than 2 points");
      ok = false;
    }
    if (std::any_of(spec.geometry.begin(), spec.geometry.end(),
                    [](const geo::GeoPoint& p) { return !geo::is_valid(p); })) {
      problems.push_back(name + " geometry has invalid coordinates");
      ok = false;
    }
    if (!ok) continue;

    Edge e;
    e.id = spec.id;
    e.from = spec.from;
    e.to = spec.to;
    e.reverse_of = spec.reverse_of;
    e.geometry = std::move(spec.geometry);
    e.planar.reserve(e.geometry.size());
    try {
      for (const auto& p : e.geometry) e.planar.push_back(proj.project(p));
    } catch (const GeoError& err) {
      problems.push_back(name + ": " + err.what());
      continue;
    }
    e.cumulative.assign(e.planar.size(), 0.0);
    for (std::size_t i = 1; i < e.planar.size(); ++i) {
      e.cumulative[i] = e.cumulative[i - 1] + geo::planar_distance(e.planar[i - 1], e.planar[i]);
    }
    e.length = e.cumulative.back();

    if (!(e.length > 0.0)) {
      problems.push_back(name + " has zero length");
      ok = false;
    }
    const double d_from = geo::planar_distance(e.planar.front(), proj.project_unchecked(from->location));
    const double d_to = geo::planar_distance(e.planar.back(), proj.project_unchecked(to->location));
    if (d_from > kEndpointToleranceMeters) {
      std::ostringstream os;
      os << name << " geometry starts " << d_from << " m from its from-" << to_string(e.from);
      problems.push_back(os.str());
      ok = false;
    }
    if (d_to > kEndpointToleranceMeters) {
      std::ostringstream os;
      os << name << " geometry ends " << d_to << " m from its to-" << to_string(e.to);
      problems.push_back(os.str());
      ok = false;
    }
    if (!ok) continue;

    net.edge_index_.emplace(e.id, net.edges_.size());
    net.edges_.push_back(std::move(e));
  }

  // Reverse pairing must be an involution with swapped endpoints and mirrored
  // geometry.
  for (const Edge& e : net.edges_) {
    if (!e.reverse_of) continue;
    const std::string name = to_string(e.id);
    auto it = net.edge_index_.find(*e.reverse_of);
    if (it == net.edge_index_.end()) {
      problems.push_back(name + " reverse_of references missing " + to_string(*e.reverse_of));
      continue;
    }
    const Edge& r = net.edges_[it->second];
    if (r.id == e.id) {
      problems.push_back(name + " is marked as its own reverse");
      continue;
    }
    if (!r.reverse_of || *r.reverse_of != e.id) {
      problems.push_back(name + " reverse_of " + to_string(r.id) + " does not point back");
    }
    if (r.from != e.to || r.to != e.from) {
      problems.push_back(name + " and its reverse " + to_string(r.id) + " do not have swapped endpoints");
    } else if (r.planar.size() != e.planar.size()) {
      problems.push_back(name + " and its reverse " + to_string(r.id) + " have different vertex counts");
    } else {
      const std::size_t n = e.planar.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (geo::planar_distance(e.planar[i], r.planar[n - 1 - i]) > kEndpointToleranceMeters) {
          problems.push_back(name + " geometry is not the reverse of " + to_string(r.id));
          break;
        }
      }
    }
  }

  if (!problems.empty()) throw NetworkError(std::move(problems));

  net.nodes_ = std::move(nodes);
  for (const Node& n : net.nodes_) net.out_adjacency_[n.id];
  for (const Edge& e : net.edges_) net.out_adjacency_[e.from].push_back(e.id);
  // Departure heading first so that branch order, and with it every seeded
  // branch choice, does not depend on how edges are numbered.
  auto departure = [&net](EdgeId id) {
    const auto& pts = net.edges_[net.edge_index_.at(id)].planar;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (geo::planar_distance(pts.front(), pts[i]) > 0.0) return geo::bearing(pts.front(), pts[i]);
    }
    return 0.0;
  };
  for (auto& [node, out] : net.out_adjacency_) {
    std::sort(out.begin(), out.end(), [&](EdgeId a, EdgeId b) {
      const double ha = departure(a), hb = departure(b);
      return ha != hb ? ha < hb : a < b;
    });
  }
  net.grid_ = SpatialGrid(net.edges_, grid_cell);
  return net;
}

// ---------------------------------------------------------------------------
// RoadNetwork

const Node& RoadNetwork::node(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw std::out_of_range("unknown " + to_string(id));
  return nodes_[it->second];
}

const Edge& RoadNetwork::edge(EdgeId id) const { return edges_[edge_index(id)]; }

std::size_t RoadNetwork::edge_index(EdgeId id) const {
  auto it = edge_index_.find(id);
  if (it == edge_index_.end()) throw std::out_of_range("unknown " + to_string(id));
  return it->second;
}

std::span<const EdgeId> RoadNetwork::out_edges(NodeId node) const {
  auto it = out_adjacency_.find(node);
  if (it == out_adjacency_.end()) throw std::out_of_range("unknown " + to_string(node));
  return it->second;
}

std::vector<EdgeMatch> RoadNetwork::edges_within_radius(const geo::GeoPoint& p, double radius) const {
  return edges_within_radius(projection_.project(p), radius);
}

std::vector<EdgeMatch> RoadNetwork::edges_within_radius(const geo::PlanarPoint& p, double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("search radius must be positive");
  // Best (dist, offset) per edge index among visited segments.
  std::vector<std::pair<std::size_t, std::pair<double, double>>> best;
  grid_.for_each_near(p, radius, [&](const SpatialGrid::SegmentRef& ref) {
    const Edge& e = edges_[ref.edge_index];
    const auto sp = geo::point_segment_projection(p, e.planar[ref.segment], e.planar[ref.segment + 1]);
    if (sp.dist > radius) return;
    const double seg_len = e.cumulative[ref.segment + 1] - e.cumulative[ref.segment];
    const double offset = std::min(e.length, e.cumulative[ref.segment] + sp.t * seg_len);
    auto it = std::find_if(best.begin(), best.end(), [&](const auto& b) { return b.first == ref.edge_index; });
    if (it == best.end()) {
      best.push_back({ref.edge_index, {sp.dist, offset}});
    } else if (sp.dist < it->second.first) {
      it->second = {sp.dist, offset};
    }
  });
  std::vector<EdgeMatch> out;
  out.reserve(best.size());
  for (const auto& [idx, dm] : best) {
    const Edge& e = edges_[idx];
    out.push_back({e.id, {e.id, dm.second}, dm.first});
  }
  std::sort(out.begin(), out.end(), [](const EdgeMatch& a, const EdgeMatch& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.edge < b.edge;
  });
  return out;
}

std::size_t RoadNetwork::segment_at(const Edge& e, double offset) const noexcept {
  // Last vertex whose cumulative length is <= offset, capped to the final
  // segment.
  auto it = std::upper_bound(e.cumulative.begin(), e.cumulative.end(), offset);
  std::size_t seg = it == e.cumulative.begin() ? 0 : static_cast<std::size_t>(it - e.cumulative.begin()) - 1;
  return std::min(seg, e.planar.size() - 2);
}

geo::PlanarPoint RoadNetwork::position_to_planar(const NetworkPosition& pos) const {
  const Edge& e = edge(pos.edge);
  const double offset = std::clamp(pos.offset, 0.0, e.length);
  const std::size_t s = segment_at(e, offset);
  const double seg_len = e.cumulative[s + 1] - e.cumulative[s];
  const double t = seg_len > 0.0 ? (offset - e.cumulative[s]) / seg_len : 0.0;
  const auto& a = e.planar[s];
  const auto& b = e.planar[s + 1];
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

geo::GeoPoint RoadNetwork::position_to_point(const NetworkPosition& pos) const {
  const Edge& e = edge(pos.edge);
  if (pos.offset <= 0.0) return e.geometry.front();
  if (pos.offset >= e.length) return e.geometry.back();
  return projection_.unproject(position_to_planar(pos));
}

double RoadNetwork::heading_at(const NetworkPosition& pos) const {
  const Edge& e = edge(pos.edge);
  std::size_t s = segment_at(e, std::clamp(pos.offset, 0.0, e.length));
  // Skip zero-length segments so the heading is always defined.
  while (s + 1 < e.planar.size() - 1 && e.planar[s] == e.planar[s + 1]) ++s;
  while (s > 0 && e.planar[s] == e.planar[s + 1]) --s;
  return geo::bearing(e.planar[s], e.planar[s + 1]);
}

namespace {

void check_connected(const RoadNetwork& net, std::span<const EdgeId> path) {
  if (path.empty()) throw PathError("empty edge sequence", 0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Edge& prev = net.edge(path[i - 1]);
    const Edge& next = net.edge(path[i]);
    if (prev.to != next.from) {
      throw PathError("edge sequence breaks at index " + std::to_string(i) + ": " + to_string(prev.id) +
                          " ends at " + to_string(prev.to) + " but " + to_string(next.id) + " starts at " +
                          to_string(next.from),
                      i);
    }
  }
}

}  // namespace

std::vector<geo::GeoPoint> RoadNetwork::path_geometry(std::span<const EdgeId> path) const {
  check_connected(*this, path);
  std::vector<geo::GeoPoint> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& g = edge(path[i]).geometry;
    out.insert(out.end(), g.begin() + (i == 0 ? 0 : 1), g.end());
  }
  return out;
}

std::vector<geo::PlanarPoint> RoadNetwork::path_planar(std::span<const EdgeId> path) const {
  check_connected(*this, path);
  std::vector<geo::PlanarPoint> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& g = edge(path[i]).planar;
    out.insert(out.end(), g.begin() + (i == 0 ? 0 : 1), g.end());
  }
  return out;
}

double RoadNetwork::total_length(std::span<const EdgeId> ids) const {
  double total = 0.0;
  for (EdgeId id : ids) total += edge(id).length;
  return total;
}

std::span<const EdgeId> out_edges(const RoadNetwork& net, NodeId node) { return net.out_edges(node); }

std::vector<EdgeId> admissible_next(const RoadNetwork& net, const Edge& arriving, bool allow_uturn) {
  const auto out = net.out_edges(arriving.to);
  std::vector<EdgeId> next(out.begin(), out.end());
  if (allow_uturn || !arriving.reverse_of || next.size() <= 1) return next;
  std::erase(next, *arriving.reverse_of);
  return next;
}

namespace {

template <class Engine>
NetworkStep advance_with(const RoadNetwork& net, const NetworkPosition& pos, double dist, Engine& rng,
                         bool allow_uturn) {
  if (!(dist >= 0.0) || !std::isfinite(dist)) throw std::invalid_argument("advance distance must be finite and >= 0");
  NetworkStep step;
  const Edge* cur = &net.edge(pos.edge);
  double offset = std::clamp(pos.offset, 0.0, cur->length);
  double remaining = dist;
  while (remaining > cur->length - offset) {
    const auto next = admissible_next(net, *cur, allow_uturn);
    if (next.empty()) {
      step.dead_end = true;
      offset = cur->length;
      remaining = 0.0;
      break;
    }
    remaining -= cur->length - offset;
    std::uniform_int_distribution<std::size_t> pick(0, next.size() - 1);
    step.traversed.push_back(cur->id);
    cur = &net.edge(next[pick(rng)]);
    offset = 0.0;
  }
  step.end = {cur->id, std::min(offset + remaining, cur->length)};
  return step;
}

}  // namespace

NetworkStep advance(const RoadNetwork& net, const NetworkPosition& pos, double dist, Rng& rng,
                    bool allow_uturn) {
  return advance_with(net, pos, dist, rng, allow_uturn);
}

NetworkStep advance(const RoadNetwork& net, const NetworkPosition& pos, double dist, StreamRng& rng,
                    bool allow_uturn) {
  return advance_with(net, pos, dist, rng, allow_uturn);
}

}  // namespace pfmm::roadnet
