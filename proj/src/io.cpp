#include "pfmm/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

#include "pfmm/error.hpp"

namespace pfmm::io {

using roadnet::EdgeId;
using roadnet::NodeId;

namespace {

constexpr double kSnapMeters = roadnet::kEndpointToleranceMeters;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json edge_ids(std::span<const EdgeId> ids) {
  json arr = json::array();
  for (EdgeId id : ids) arr.push_back(roadnet::value(id));
  return arr;
}

geo::GeoPoint read_coordinate(const json& c, const std::string& where) {
  if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
    throw ParseError(where + ": coordinate must be [lon, lat]");
  }
  return {c[1].get<double>(), c[0].get<double>()};
}

// Clusters endpoints lying within kSnapMeters of each other.
class NodeSnapper {
 public:
  explicit NodeSnapper(const geo::LocalProjection& proj) : proj_(proj) {}

  NodeId snap(const geo::GeoPoint& p) {
    const auto q = proj_.project(p);
    const auto cx = static_cast<std::int64_t>(std::floor(q.x / kSnapMeters));
    const auto cy = static_cast<std::int64_t>(std::floor(q.y / kSnapMeters));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(roadnet::SpatialGrid::key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t idx : it->second) {
          if (geo::planar_distance(planar_[idx], q) <= kSnapMeters) return nodes_[idx].id;
        }
      }
    }
    const NodeId id{nodes_.size()};
    cells_[roadnet::SpatialGrid::key(cx, cy)].push_back(nodes_.size());
    nodes_.push_back({id, p});
    planar_.push_back(q);
    return id;
  }

  std::vector<roadnet::Node> take() { return std::move(nodes_); }

 private:
  const geo::LocalProjection& proj_;
  std::vector<roadnet::Node> nodes_;
  std::vector<geo::PlanarPoint> planar_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

roadnet::RoadNetwork parse_network_geojson(std::string_view text, double grid_cell) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw ParseError("network GeoJSON must be a FeatureCollection with a features array");
  }

  struct Line {
    std::uint64_t id;
    bool oneway;
    std::vector<geo::GeoPoint> coords;
  };
  std::vector<Line> lines;
  std::vector<std::string> problems;
  const auto& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const std::string where = "feature " + std::to_string(i);
    try {
      if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
        throw ParseError(where + ": missing geometry");
      }
      const auto& g = f["geometry"];
      if (g.value("type", "") != "LineString") throw ParseError(where + ": geometry must be a LineString");
      if (!g.contains("coordinates") || !g["coordinates"].is_array() || g["coordinates"].size() < 2) {
        throw ParseError(where + ": LineString needs at least 2 coordinates");
      }
      if (!f.contains("properties") || !f["properties"].is_object()) throw ParseError(where + ": missing properties");
      const auto& props = f["properties"];
      if (!props.contains("id") || !props["id"].is_number_integer() || props["id"].get<std::int64_t>() < 0) {
        throw ParseError(where + ": property 'id' must be a non-negative integer");
      }
      if (!props.contains("oneway") || !props["oneway"].is_boolean()) {
        throw ParseError(where + ": property 'oneway' must be a boolean");
      }
      Line line{props["id"].get<std::uint64_t>(), props["oneway"].get<bool>(), {}};
      for (const auto& c : g["coordinates"]) {
        line.coords.push_back(read_coordinate(c, where));
        if (!geo::is_valid(line.coords.back())) throw ParseError(where + ": coordinate out of range");
      }
      lines.push_back(std::move(line));
    } catch (const ParseError& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "network GeoJSON is invalid";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ParseError(msg);
  }
  if (lines.empty()) throw ParseError("network GeoJSON has no features");

  const geo::LocalProjection snap_frame(lines.front().coords.front());
  NodeSnapper snapper(snap_frame);
  std::vector<roadnet::EdgeSpec> edges;
  try {
    for (const auto& line : lines) {
      const NodeId a = snapper.snap(line.coords.front());
      const NodeId b = snapper.snap(line.coords.back());
      const EdgeId fwd{2 * line.id};
      const EdgeId rev{2 * line.id + 1};
      edges.push_back({fwd, a, b, line.coords, line.oneway ? std::nullopt : std::optional<EdgeId>(rev)});
      if (!line.oneway) {
        std::vector<geo::GeoPoint> reversed(line.coords.rbegin(), line.coords.rend());
        edges.push_back({rev, b, a, std::move(reversed), fwd});
      }
    }
  } catch (const GeoError& e) {
    throw ParseError(std::string("network GeoJSON: ") + e.what());
  }
  return roadnet::build_network(snapper.take(), std::move(edges), grid_cell);
}

roadnet::RoadNetwork read_network(const std::string& path, double grid_cell) {
  const std::string text = read_file(path);
  try {
    return parse_network_geojson(text, grid_cell);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json network_to_geojson(const roadnet::RoadNetwork& net) {
  json features = json::array();
  for (const auto& e : net.edges()) {
    const auto id = roadnet::value(e.id);
    if (id % 2 == 1) {
      if (!e.reverse_of || roadnet::value(*e.reverse_of) != id - 1) {
        throw Error(roadnet::to_string(e.id) + " does not follow the 2*id / 2*id+1 edge convention");
      }
      continue;
    }
    if (e.reverse_of && roadnet::value(*e.reverse_of) != id + 1) {
      throw Error(roadnet::to_string(e.id) + " does not follow the 2*id / 2*id+1 edge convention");
    }
    json coords = json::array();
    for (const auto& p : e.geometry) coords.push_back({p.lon, p.lat});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"id", id / 2}, {"oneway", !e.reverse_of.has_value()}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

json match_to_geojson(const roadnet::RoadNetwork& net, const filter::MatchResult& result) {
  json features = json::array();
  for (std::size_t k = 0; k < result.candidates.size(); ++k) {
    const auto& c = result.candidates[k];
    json coords = json::array();
    for (const auto& p : net.path_geometry(c.edges)) coords.push_back({p.lon, p.lat});
    features.push_back({{"type", "Feature"},
                        {"properties",
                         {{"probability", c.probability},
                          {"rank", k + 1},
                          {"support", c.support},
                          {"edge_ids", edge_ids(c.edges)}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

json to_json(const filter::FilterParams& p) {
  return {{"particle_count", p.particle_count},
          {"init_pos_sigma", p.init_pos_sigma},
          {"init_bearing_sigma", p.init_bearing_sigma},
          {"init_radius", p.init_radius},
          {"bearing_gate", p.bearing_gate},
          {"snap_tolerance", p.snap_tolerance},
          {"transition_sigma", p.transition_sigma},
          {"transition_sigma_fraction", p.transition_sigma_fraction},
          {"measurement_sigma", p.measurement_sigma},
          {"allow_uturn", p.allow_uturn},
          {"resample_mode", p.resample_mode == filter::ResampleMode::kEveryStep ? "every_step" : "adaptive"},
          {"ess_threshold", p.ess_threshold},
          {"seed", p.seed}};
}

namespace {

json candidate_json(const filter::CandidatePath& c, std::size_t rank) {
  return {{"rank", rank}, {"probability", c.probability}, {"support", c.support}, {"edge_ids", edge_ids(c.edges)}};
}

}  // namespace

json to_json(const filter::MatchResult& r) {
  json candidates = json::array();
  for (std::size_t k = 0; k < r.candidates.size(); ++k) candidates.push_back(candidate_json(r.candidates[k], k + 1));
  json abandoned = json::array();
  for (const auto& c : r.abandoned_segments) abandoned.push_back(candidate_json(c, 1));
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"step", s.step},
                     {"control", s.control},
                     {"ess", s.ess},
                     {"resampled", s.resampled},
                     {"reinitialized", s.reinitialized},
                     {"distinct_histories", s.distinct_histories}});
  }
  return {{"candidates", candidates},
          {"steps", steps},
          {"recovery_events", r.recovery_events},
          {"segmented", r.segmented()},
          {"segment_start", r.segment_start},
          {"abandoned_segments", abandoned},
          {"params", to_json(r.params)}};
}

json to_json(const eval::EvalReport& r) {
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"index", e.index}, {"distance", e.distance}});
  return {{"matcher", eval::to_string(r.matcher)},
          {"p25", number_or_null(r.p25)},
          {"p50", number_or_null(r.p50)},
          {"p75", number_or_null(r.p75)},
          {"mean", number_or_null(r.mean)},
          {"errors", errors},
          {"recovery_events", r.recovery_events},
          {"holdout_fraction", r.holdout_fraction},
          {"params", to_json(r.params)}};
}

json to_json(const eval::SweepReport& r) {
  json results = json::array();
  for (const auto& level : r.results) {
    results.push_back({{"level", level.level},
                       {"particle_filter", to_json(level.filter)},
                       {"baseline", to_json(level.baseline)},
                       {"failures", {{"particle_filter", level.filter_failures}, {"baseline", level.baseline_failures}}}});
  }
  return {{"axis", eval::to_string(r.axis)}, {"levels", r.levels}, {"trials", r.trials}, {"results", results}};
}

json to_json(const simulate::GroundTruth& t) {
  json positions = json::array();
  for (const auto& p : t.positions) positions.push_back({{"edge", roadnet::value(p.edge)}, {"offset", p.offset}});
  return {{"path", edge_ids(t.path)}, {"positions", positions}, {"truncated", t.truncated}};
}

std::string sweep_errors_csv(const eval::SweepReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "axis,level,matcher,index,distance\n";
  for (const auto& level : report.results) {
    for (const eval::EvalReport* r : {&level.filter, &level.baseline}) {
      for (const auto& e : r->errors) {
        os << eval::to_string(report.axis) << ',' << level.level << ',' << eval::to_string(r->matcher) << ','
           << e.index << ',' << e.distance << '\n';
      }
    }
  }
  return os.str();
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace pfmm::io
