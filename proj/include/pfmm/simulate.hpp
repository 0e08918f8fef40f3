#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfmm/random.hpp"
#include "pfmm/roadnet.hpp"
#include "pfmm/trajectory.hpp"

namespace pfmm::simulate {

using roadnet::EdgeId;
using roadnet::NetworkPosition;
using roadnet::RoadNetwork;

struct SimConfig {
  double speed = 10.0;            // m/s
  double duration = 199.0;        // s
  double sample_interval = 1.0;   // s
  double noise_sigma = 5.0;       // m, per planar axis
  double bearing_noise_sigma = 5.0;  // deg
  bool allow_uturn = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::vector<EdgeId> path;
  std::vector<NetworkPosition> positions;  // one per emitted fix
  // The walk hit a dead end before the duration elapsed.
  bool truncated = false;
};

struct Simulation {
  trajectory::Trajectory trajectory;
  GroundTruth truth;
};

/// Drives a vehicle at constant speed from a length-uniform random start,
/// branching like roadnet::advance, and emits a noisy fix every
/// sample_interval seconds (timestamps k * sample_interval). Throws
/// SimulationError when fewer than two fixes could be emitted.
Simulation simulate(const RoadNetwork& net, const SimConfig& cfg, Rng& rng);

// Length of the multiset intersection of predicted and truth edges divided
// by the length of truth. Throws pfmm::Error on an empty truth.
double path_overlap(std::span<const EdgeId> predicted, std::span<const EdgeId> truth, const RoadNetwork& net);

}  // namespace pfmm::simulate
