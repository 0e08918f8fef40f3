#include "pfmm/filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include "pfmm/error.hpp"

namespace pfmm::filter {

void FilterParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(name) + " must be > 0");
  };
  if (particle_count < 1) throw Error("particle_count must be >= 1");
  positive(init_pos_sigma, "init_pos_sigma");
  positive(init_bearing_sigma, "init_bearing_sigma");
  positive(init_radius, "init_radius");
  positive(snap_tolerance, "snap_tolerance");
  positive(transition_sigma, "transition_sigma");
  positive(measurement_sigma, "measurement_sigma");
  if (!(bearing_gate > 0.0 && bearing_gate <= 180.0)) throw Error("bearing_gate must be in (0, 180]");
  if (!(transition_sigma_fraction >= 0.0) || !std::isfinite(transition_sigma_fraction)) {
    throw Error("transition_sigma_fraction must be >= 0");
  }
  if (!(ess_threshold > 0.0 && ess_threshold <= 1.0)) throw Error("ess_threshold must be in (0, 1]");
}

double FilterParams::transition_sigma_for(double control) const noexcept {
  return std::max(transition_sigma, transition_sigma_fraction * control);
}

ParticleSet initialize(const RoadNetwork& net, const GpsPoint& first, const FilterParams& params, Rng& rng) {
  params.validate();
  const geo::PlanarPoint centre = net.projection().project(first.position);
  if (net.edges_within_radius(centre, params.init_radius).empty()) {
    std::ostringstream os;
    os << "no road edge within " << params.init_radius << " m of (" << first.position.lat << ", "
       << first.position.lon << ")";
    throw UnmatchableStartError(os.str());
  }

  const std::size_t m = params.particle_count;
  const std::size_t max_proposals = 1000 * m;
  std::normal_distribution<double> pos_noise(0.0, params.init_pos_sigma);
  std::normal_distribution<double> bearing_noise(0.0, params.init_bearing_sigma);

  ParticleSet set;
  set.particles.reserve(m);
  std::size_t proposals = 0;
  while (set.particles.size() < m) {
    if (proposals == max_proposals) {
      std::ostringstream os;
      os << "initialisation accepted " << set.particles.size() << " of " << proposals
         << " proposals (snap_tolerance " << params.snap_tolerance << " m, bearing_gate " << params.bearing_gate
         << " deg, init_pos_sigma " << params.init_pos_sigma << " m, init_bearing_sigma "
         << params.init_bearing_sigma << " deg)";
      throw InitializationError(os.str());
    }
    ++proposals;
    const geo::PlanarPoint p{centre.x + pos_noise(rng), centre.y + pos_noise(rng)};
    const double b = first.bearing + bearing_noise(rng);
    // Nearest edge passing the gate. Equidistant edges (typically the ones
    // sharing a node) are separated by heading agreement before id.
    const roadnet::EdgeMatch* chosen = nullptr;
    double chosen_gap = 0.0;
    const auto matches = net.edges_within_radius(p, params.snap_tolerance);
    for (const auto& match : matches) {
      if (chosen && match.dist > chosen->dist) break;
      const double gap = geo::angle_difference(net.heading_at(match.position), b);
      if (gap > params.bearing_gate) continue;
      if (!chosen || gap < chosen_gap) {
        chosen = &match;
        chosen_gap = gap;
      }
    }
    if (chosen) set.particles.push_back({chosen->position, {chosen->edge}, 1.0 / static_cast<double>(m)});
  }
  return set;
}

double control_distance(const GpsPoint& prev, const GpsPoint& curr, const geo::LocalProjection& proj) {
  return geo::planar_distance(proj.project(prev.position), proj.project(curr.position));
}

ParticleSet propagate(const RoadNetwork& net, ParticleSet set, double control, const FilterParams& params) {
  if (!(control >= 0.0) || !std::isfinite(control)) throw Error("control distance must be finite and >= 0");
  const std::size_t step = set.step + 1;
  const double sigma = params.transition_sigma_for(control);
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    Particle& particle = set.particles[i];
    StreamRng rng(mix_seed(params.seed, step, i));
    std::normal_distribution<double> travel(control, sigma);
    const double d = std::max(0.0, travel(rng));
    auto moved = roadnet::advance(net, particle.state, d, rng, params.allow_uturn);
    if (!moved.traversed.empty()) {
      particle.history.insert(particle.history.end(), moved.traversed.begin() + 1, moved.traversed.end());
      particle.history.push_back(moved.end.edge);
    }
    particle.state = moved.end;
  }
  set.step = step;
  return set;
}

double effective_sample_size(const ParticleSet& set) noexcept {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : set.particles) {
    sum += p.weight;
    sum_sq += p.weight * p.weight;
  }
  return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
}

WeighOutcome weigh(ParticleSet set, const GpsPoint& obs, const FilterParams& params, const RoadNetwork& net) {
  const geo::PlanarPoint target = net.projection().project(obs.position);
  const double inv_two_var = 1.0 / (2.0 * params.measurement_sigma * params.measurement_sigma);
  std::vector<double> updated(set.particles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    const Particle& p = set.particles[i];
    const double d = geo::planar_distance(net.position_to_planar(p.state), target);
    updated[i] = p.weight * std::exp(-d * d * inv_two_var);
    total += updated[i];
  }
  WeighOutcome out;
  if (!(total > 0.0)) {
    out.degenerate = true;
    out.set = std::move(set);
    return out;
  }
  for (std::size_t i = 0; i < set.particles.size(); ++i) set.particles[i].weight = updated[i] / total;
  out.set = std::move(set);
  out.ess = effective_sample_size(out.set);
  return out;
}

ParticleSet resample(const ParticleSet& set, const FilterParams& params, Rng& rng) {
  const std::size_t m = params.particle_count;
  std::vector<double> cumulative(set.particles.size());
  double running = 0.0;
  for (std::size_t i = 0; i < set.particles.size(); ++i) {
    running += set.particles[i].weight;
    cumulative[i] = running;
  }
  if (!(running > 0.0)) throw FilterError("cannot resample a particle set whose weights are all zero");

  ParticleSet out;
  out.step = set.step;
  out.particles.reserve(m);
  std::uniform_real_distribution<double> u(0.0, running);
  const double w = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u(rng));
    // u can round to exactly `running`
    if (it == cumulative.end()) --it;
    Particle copy = set.particles[static_cast<std::size_t>(it - cumulative.begin())];
    copy.weight = w;
    out.particles.push_back(std::move(copy));
  }
  return out;
}

std::vector<CandidatePath> extract_paths(const ParticleSet& set, std::size_t m) {
  std::map<std::vector<EdgeId>, std::size_t> groups;
  for (const auto& p : set.particles) ++groups[p.history];
  std::vector<CandidatePath> out;
  out.reserve(groups.size());
  for (auto& [edges, count] : groups) {
    out.push_back({edges, static_cast<double>(count) / static_cast<double>(m), count});
  }
  // map iteration is already lexicographic, so a stable sort on support keeps
  // the tie-break
  std::stable_sort(out.begin(), out.end(),
                   [](const CandidatePath& a, const CandidatePath& b) { return a.support > b.support; });
  return out;
}

namespace {

struct HistoryHash {
  std::size_t operator()(const std::vector<EdgeId>* h) const noexcept {
    std::uint64_t acc = h->size();
    for (EdgeId e : *h) acc = mix_seed(acc, roadnet::value(e));
    return static_cast<std::size_t>(acc);
  }
};

struct HistoryEq {
  bool operator()(const std::vector<EdgeId>* a, const std::vector<EdgeId>* b) const noexcept { return *a == *b; }
};

std::size_t distinct_histories(const ParticleSet& set) {
  std::unordered_set<const std::vector<EdgeId>*, HistoryHash, HistoryEq> seen;
  seen.reserve(set.particles.size());
  for (const auto& p : set.particles) seen.insert(&p.history);
  return seen.size();
}

}  // namespace

MatchResult run_filter(const RoadNetwork& net, const Trajectory& traj, const FilterParams& params) {
  params.validate();
  const std::size_t m = params.particle_count;
  MatchResult result;
  result.params = params;

  Rng init_rng = make_stream(params.seed, 0, kInitStream);
  ParticleSet set = initialize(net, traj[0], params, init_rng);
  bool depleted = false;

  for (std::size_t t = 1; t < traj.size(); ++t) {
    StepSummary summary;
    summary.step = t;
    summary.control = control_distance(traj[t - 1], traj[t], net.projection());

    if (depleted) {
      // Waiting for an observation the cloud can be rebuilt around.
      try {
        Rng rng = make_stream(params.seed, t, kInitStream);
        set = initialize(net, traj[t], params, rng);
        set.step = t;
        depleted = false;
        result.segment_start = t;
        summary.reinitialized = true;
        summary.ess = static_cast<double>(m);
        summary.distinct_histories = distinct_histories(set);
      } catch (const FilterError&) {
      }
      result.steps.push_back(summary);
      continue;
    }

    set = propagate(net, std::move(set), summary.control, params);
    WeighOutcome weighed = weigh(std::move(set), traj[t], params, net);
    set = std::move(weighed.set);

    if (weighed.degenerate) {
      ++result.recovery_events;
      result.abandoned_segments.push_back(extract_paths(set, m).front());
      try {
        Rng rng = make_stream(params.seed, t, kInitStream);
        set = initialize(net, traj[t], params, rng);
        set.step = t;
        result.segment_start = t;
        summary.reinitialized = true;
        summary.ess = static_cast<double>(m);
      } catch (const FilterError&) {
        depleted = true;
      }
      summary.distinct_histories = depleted ? 0 : distinct_histories(set);
      result.steps.push_back(summary);
      continue;
    }

    summary.ess = weighed.ess;
    const bool last = t + 1 == traj.size();
    if (params.resample_mode == ResampleMode::kEveryStep || last ||
        weighed.ess < params.ess_threshold * static_cast<double>(m)) {
      Rng rng = make_stream(params.seed, t, kResampleStream);
      set = resample(set, params, rng);
      summary.resampled = true;
    }
    summary.distinct_histories = distinct_histories(set);
    result.steps.push_back(summary);
  }

  if (depleted) {
    throw FilterError("particle cloud depleted and no later observation lies near the network");
  }
  result.candidates = extract_paths(set, m);
  return result;
}

}  // namespace pfmm::filter
