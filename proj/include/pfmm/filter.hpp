#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pfmm/random.hpp"
#include "pfmm/roadnet.hpp"
#include "pfmm/trajectory.hpp"

namespace pfmm::filter {

using roadnet::EdgeId;
using roadnet::NetworkPosition;
using roadnet::RoadNetwork;
using trajectory::GpsPoint;
using trajectory::Trajectory;

enum class ResampleMode {
  kEveryStep,  // resample after every weighting
  kAdaptive,   // resample only when ESS < ess_threshold * M (and at the last step)
};

/// Tuning knobs for run_filter. Defaults target consumer-grade GPS (about
/// 5 m error) on urban networks.
struct FilterParams {
  std::size_t particle_count = 1000;
  // Initial cloud around the first fix.
  double init_pos_sigma = 10.0;      // meters, per planar axis
  double init_bearing_sigma = 20.0;  // degrees
  double init_radius = 50.0;         // meters; no edge this close => unmatchable start
  double bearing_gate = 90.0;        // degrees; max edge-heading mismatch for a proposal
  double snap_tolerance = 2.0;       // meters; proposals this close to an edge are snapped onto it
  // Transition noise: sigma(u) = max(transition_sigma, transition_sigma_fraction * u).
  double transition_sigma = 2.0;
  double transition_sigma_fraction = 0.2;
  double measurement_sigma = 5.0;  // meters
  bool allow_uturn = false;
  ResampleMode resample_mode = ResampleMode::kEveryStep;
  double ess_threshold = 0.5;  // fraction of M, adaptive mode only
  std::uint64_t seed = 0;

  // Throws pfmm::Error describing the first invalid field.
  void validate() const;
  double transition_sigma_for(double control) const noexcept;
};

struct Particle {
  NetworkPosition state;
  // Every edge entered since (re)initialisation; back() == state.edge.
  std::vector<EdgeId> history;
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::size_t step = 0;  // index of the observation the set was last conditioned on
};

struct CandidatePath {
  std::vector<EdgeId> edges;
  double probability = 0.0;
  std::size_t support = 0;
};

struct StepSummary {
  std::size_t step = 0;
  double control = 0.0;  // meters
  double ess = 0.0;      // after weighting, before resampling
  bool resampled = false;
  bool reinitialized = false;
  std::size_t distinct_histories = 0;
};

struct MatchResult {
  // Sorted by probability descending, ties by lexicographic edge ids.
  std::vector<CandidatePath> candidates;
  std::vector<StepSummary> steps;
  std::size_t recovery_events = 0;
  // Index of the observation the surviving particle cloud was initialised at.
  // Non-zero only after a recovery, in which case candidates cover the suffix
  // from there on.
  std::size_t segment_start = 0;
  // Most likely path of every segment abandoned by a recovery, in order.
  std::vector<CandidatePath> abandoned_segments;
  FilterParams params;

  bool segmented() const noexcept { return recovery_events > 0; }
  const CandidatePath& best() const { return candidates.front(); }
};

struct WeighOutcome {
  ParticleSet set;
  // Every likelihood underflowed to zero; weights are left as they were.
  bool degenerate = false;
  double ess = 0.0;
};

// Stream coordinates used with mix_seed(seed, step, stream). Particle indices
// occupy the low range, so these are reserved values at the top.
inline constexpr std::uint64_t kInitStream = ~std::uint64_t{0};
inline constexpr std::uint64_t kResampleStream = ~std::uint64_t{0} - 1;

/// Rejection-samples the initial particle cloud around `first`.
///
/// Each proposal draws a planar position and a bearing from Gaussians centred
/// on the fix. It is kept when an edge lies within snap_tolerance whose local
/// heading is within bearing_gate of the drawn bearing; the nearest such edge
/// wins (ties by edge id) and the particle is placed at the projection onto
/// it.
ParticleSet initialize(const RoadNetwork& net, const GpsPoint& first, const FilterParams& params, Rng& rng);

// Planar distance between two fixes in the network frame.
double control_distance(const GpsPoint& prev, const GpsPoint& curr, const geo::LocalProjection& proj);

/// Moves every particle by max(0, N(u, sigma(u))) meters along the network.
/// Particle i draws from stream (params.seed, set.step + 1, i), so results do
/// not depend on evaluation order. Returns the set at step + 1.
ParticleSet propagate(const RoadNetwork& net, ParticleSet set, double control, const FilterParams& params);

// Multiplies weights by the Gaussian measurement likelihood and normalises.
WeighOutcome weigh(ParticleSet set, const GpsPoint& obs, const FilterParams& params, const RoadNetwork& net);

// M multinomial draws by weight; weights reset to 1/M. Throws FilterError
// when the weights are all zero.
ParticleSet resample(const ParticleSet& set, const FilterParams& params, Rng& rng);

double effective_sample_size(const ParticleSet& set) noexcept;

// Groups particles by identical history; probability = group size / M.
std::vector<CandidatePath> extract_paths(const ParticleSet& set, std::size_t m);

MatchResult run_filter(const RoadNetwork& net, const Trajectory& traj, const FilterParams& params);

}  // namespace pfmm::filter
