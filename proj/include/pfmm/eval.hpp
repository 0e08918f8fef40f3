#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfmm/filter.hpp"

namespace pfmm::eval {

using filter::CandidatePath;
using filter::FilterParams;
using roadnet::EdgeId;
using roadnet::RoadNetwork;
using trajectory::GpsPoint;
using trajectory::Trajectory;

struct PointError {
  std::size_t index = 0;  // index of the held-out point in the evaluated trajectory
  double distance = 0.0;  // meters to the aligned path
};

enum class ScoreMode {
  kMostLikely,  // distance to the top candidate
  kMixture,     // probability-weighted mean distance over all candidates
};

enum class Matcher { kParticleFilter, kBaseline };

const char* to_string(Matcher m) noexcept;

struct EvalReport {
  Matcher matcher = Matcher::kParticleFilter;
  std::vector<PointError> errors;
  // NaN when there are no errors.
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double mean = 0.0;
  std::size_t recovery_events = 0;
  double holdout_fraction = 0.1;
  FilterParams params;
};

// Linear interpolation between order statistics at rank q * (n - 1).
// q in [0, 1]; NaN for an empty sample.
double percentile(std::vector<double> values, double q);

// Fills p25/p50/p75/mean from report.errors.
void summarize(EvalReport& report);

// Minimum distance from p to any segment of the polyline. Throws EvalError on
// an empty polyline.
double distance_to_path(const geo::PlanarPoint& p, std::span<const geo::PlanarPoint> path);
double distance_to_path(const RoadNetwork& net, const GpsPoint& p, std::span<const EdgeId> path);

/// Holdout cross-validation of the particle filter.
///
/// Removes floor(fraction * N) points (never the first), matches the rest and
/// scores each removed point by its distance to the aligned path. When the
/// filter had to restart, the most likely paths of the abandoned segments are
/// part of the aligned path.
EvalReport crossvalidate(const RoadNetwork& net, const Trajectory& traj, const FilterParams& params,
                         double fraction, Rng& rng, ScoreMode mode = ScoreMode::kMostLikely);

// Same protocol scored against baseline_match.
EvalReport crossvalidate_baseline(const RoadNetwork& net, const Trajectory& traj, double fraction, Rng& rng);

inline constexpr double kBaselineSnapRadius = 100.0;

/// Deterministic snap-and-stitch matcher used as a comparison point.
///
/// Each fix snaps to its nearest edge (ties within a millimetre go to the edge
/// whose heading best matches the fix bearing, then the lower id).
/// Consecutive snaps are joined by distance-weighted shortest paths. A snap
/// that lands on one of the two most recent path edges does not extend the
/// path, so small backward jitter never produces loops.
CandidatePath baseline_match(const RoadNetwork& net, const Trajectory& traj);

// Length-weighted shortest path between two nodes (empty when equal).
// std::nullopt when unreachable.
std::optional<std::vector<EdgeId>> shortest_path(const RoadNetwork& net, roadnet::NodeId from, roadnet::NodeId to);

enum class SweepAxis { kNoiseSigma, kSamplingInterval };

const char* to_string(SweepAxis a) noexcept;

struct SweepLevel {
  double level = 0.0;
  EvalReport filter;
  EvalReport baseline;
  // One message per failed trial; failures do not abort the sweep.
  std::vector<std::string> filter_failures;
  std::vector<std::string> baseline_failures;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::kNoiseSigma;
  std::vector<double> levels;
  std::size_t trials = 0;
  std::vector<SweepLevel> results;  // one per level, same order
};

/// Sensitivity sweep along one degradation axis.
///
/// Noise levels perturb the base trajectory by that many meters per axis;
/// interval levels downsample it to that many seconds. Each trial uses seeds
/// derived from one draw of `rng` and the (level, trial) coordinates, and both
/// matchers see the same degraded trajectory and holdout split. Errors are
/// pooled over trials.
SweepReport sweep(const RoadNetwork& net, const Trajectory& base, const FilterParams& params, SweepAxis axis,
                  std::span<const double> levels, std::size_t trials, Rng& rng);

}  // namespace pfmm::eval
