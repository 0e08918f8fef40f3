#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "pfmm/eval.hpp"
#include "pfmm/filter.hpp"
#include "pfmm/roadnet.hpp"
#include "pfmm/simulate.hpp"

namespace pfmm::io {

using json = nlohmann::json;

/// Reads a road network from a GeoJSON FeatureCollection of LineStrings.
///
/// Every feature needs an integer `id` and a boolean `oneway` property. A
/// one-way feature becomes edge 2*id; a two-way feature becomes edges 2*id
/// (digitised direction) and 2*id+1 (reversed), linked through reverse_of.
/// Endpoints closer than 0.5 m share a node. Node ids follow first appearance.
roadnet::RoadNetwork parse_network_geojson(std::string_view text,
                                           double grid_cell = roadnet::kDefaultGridCellMeters);
roadnet::RoadNetwork read_network(const std::string& path, double grid_cell = roadnet::kDefaultGridCellMeters);

// Inverse of parse_network_geojson for networks that follow its edge-id
// convention. Throws pfmm::Error otherwise.
json network_to_geojson(const roadnet::RoadNetwork& net);

// One LineString per candidate with `probability`, `rank`, `support` and
// `edge_ids` properties.
json match_to_geojson(const roadnet::RoadNetwork& net, const filter::MatchResult& result);

json to_json(const filter::FilterParams& params);
json to_json(const filter::MatchResult& result);
json to_json(const eval::EvalReport& report);
json to_json(const eval::SweepReport& report);
json to_json(const simulate::GroundTruth& truth);

// Pooled errors as `axis,level,matcher,index,distance`.
std::string sweep_errors_csv(const eval::SweepReport& report);

// Serialises with a trailing newline.
std::string dump(const json& doc);

// Writes through a temporary file in the same directory and renames it into
// place. Throws pfmm::Error on failure.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace pfmm::io
