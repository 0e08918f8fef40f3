#include "pfmm/simulate.hpp"

#include <cmath>
#include <map>

#include "pfmm/error.hpp"

namespace pfmm::simulate {

void SimConfig::validate() const {
  if (!(speed > 0.0) || !std::isfinite(speed)) throw Error("speed must be > 0");
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) throw Error("sample_interval must be > 0");
  if (!(duration >= 2.0 * sample_interval) || !std::isfinite(duration)) {
    throw Error("duration must be at least twice sample_interval");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw Error("noise_sigma must be >= 0");
  if (!(bearing_noise_sigma >= 0.0) || !std::isfinite(bearing_noise_sigma)) {
    throw Error("bearing_noise_sigma must be >= 0");
  }
}

namespace {

NetworkPosition random_start(const RoadNetwork& net, Rng& rng) {
  const auto& edges = net.edges();
  if (edges.empty()) throw SimulationError("cannot simulate on a network without edges");
  std::vector<double> lengths;
  lengths.reserve(edges.size());
  for (const auto& e : edges) lengths.push_back(e.length);
  std::discrete_distribution<std::size_t> pick(lengths.begin(), lengths.end());
  const auto& e = edges[pick(rng)];
  std::uniform_real_distribution<double> offset(0.0, e.length);
  return {e.id, offset(rng)};
}

}  // namespace

Simulation simulate(const RoadNetwork& net, const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto samples = static_cast<std::size_t>(std::floor(cfg.duration / cfg.sample_interval + 1e-9)) + 1;
  const double step_len = cfg.speed * cfg.sample_interval;

  GroundTruth truth;
  NetworkPosition pos = random_start(net, rng);
  truth.path.push_back(pos.edge);
  truth.positions.push_back(pos);
  for (std::size_t k = 1; k < samples; ++k) {
    auto step = roadnet::advance(net, pos, step_len, rng, cfg.allow_uturn);
    // The vehicle cannot reach the next sample time; stop at the last fix.
    if (step.dead_end) {
      truth.truncated = true;
      break;
    }
    if (!step.traversed.empty()) {
      truth.path.insert(truth.path.end(), step.traversed.begin() + 1, step.traversed.end());
      truth.path.push_back(step.end.edge);
    }
    pos = step.end;
    truth.positions.push_back(pos);
  }
  if (truth.positions.size() < 2) throw SimulationError("walk produced fewer than 2 samples");

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<trajectory::GpsPoint> points;
  points.reserve(truth.positions.size());
  for (std::size_t k = 0; k < truth.positions.size(); ++k) {
    geo::PlanarPoint p = net.position_to_planar(truth.positions[k]);
    // Draw order is fixed (x, y, bearing) so zero sigmas keep later draws
    // aligned.
    const double nx = noise(rng), ny = noise(rng), nb = noise(rng);
    p.x += cfg.noise_sigma * nx;
    p.y += cfg.noise_sigma * ny;
    trajectory::GpsPoint fix;
    fix.position = cfg.noise_sigma == 0.0 ? net.position_to_point(truth.positions[k]) : net.projection().unproject(p);
    fix.bearing = geo::normalize_bearing(net.heading_at(truth.positions[k]) + cfg.bearing_noise_sigma * nb);
    fix.timestamp = static_cast<double>(k) * cfg.sample_interval;
    points.push_back(fix);
  }
  return {trajectory::Trajectory(std::move(points)), std::move(truth)};
}

double path_overlap(std::span<const EdgeId> predicted, std::span<const EdgeId> truth, const RoadNetwork& net) {
  if (truth.empty()) throw Error("path_overlap: empty ground-truth path");
  std::map<EdgeId, long> remaining;
  for (EdgeId id : predicted) ++remaining[id];
  double shared = 0.0;
  for (EdgeId id : truth) {
    auto it = remaining.find(id);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      shared += net.edge(id).length;
    }
  }
  return shared / net.total_length(truth);
}

}  // namespace pfmm::simulate
