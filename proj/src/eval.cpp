#include "pfmm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "pfmm/error.hpp"

namespace pfmm::eval {

const char* to_string(Matcher m) noexcept {
  return m == Matcher::kParticleFilter ? "particle_filter" : "baseline";
}

const char* to_string(SweepAxis a) noexcept {
  return a == SweepAxis::kNoiseSigma ? "noise_sigma" : "sampling_interval";
}

double percentile(std::vector<double> values, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw EvalError("percentile rank must be in [0, 1]");
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

void summarize(EvalReport& report) {
  std::vector<double> d;
  d.reserve(report.errors.size());
  for (const auto& e : report.errors) d.push_back(e.distance);
  report.p25 = percentile(d, 0.25);
  report.p50 = percentile(d, 0.50);
  report.p75 = percentile(d, 0.75);
  report.mean = d.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

double distance_to_path(const geo::PlanarPoint& p, std::span<const geo::PlanarPoint> path) {
  if (path.empty()) throw EvalError("distance to an empty path is undefined");
  return geo::point_polyline_distance(p, path);
}

double distance_to_path(const RoadNetwork& net, const GpsPoint& p, std::span<const EdgeId> path) {
  return distance_to_path(net.projection().project(p.position), net.path_planar(path));
}

namespace {

EvalReport make_report(Matcher matcher, double fraction, const FilterParams& params) {
  EvalReport r;
  r.matcher = matcher;
  r.holdout_fraction = fraction;
  r.params = params;
  return r;
}

}  // namespace

EvalReport crossvalidate(const RoadNetwork& net, const Trajectory& traj, const FilterParams& params,
                         double fraction, Rng& rng, ScoreMode mode) {
  const auto split = trajectory::split_holdout(traj, fraction, rng);
  filter::MatchResult match;
  try {
    match = filter::run_filter(net, split.train, params);
  } catch (const UnmatchableStartError& e) {
    throw UnmatchableStartError(std::string("cross-validation: ") + e.what());
  } catch (const InitializationError& e) {
    throw InitializationError(std::string("cross-validation: ") + e.what());
  } catch (const FilterError& e) {
    throw FilterError(std::string("cross-validation: ") + e.what());
  }

  std::vector<std::vector<geo::PlanarPoint>> abandoned;
  for (const auto& seg : match.abandoned_segments) abandoned.push_back(net.path_planar(seg.edges));
  std::vector<std::vector<geo::PlanarPoint>> candidates;
  if (mode == ScoreMode::kMixture) {
    for (const auto& c : match.candidates) candidates.push_back(net.path_planar(c.edges));
  } else {
    candidates.push_back(net.path_planar(match.best().edges));
  }

  EvalReport report = make_report(Matcher::kParticleFilter, fraction, params);
  report.recovery_events = match.recovery_events;
  for (const auto& held : split.test) {
    const geo::PlanarPoint p = net.projection().project(held.point.position);
    double floor_dist = std::numeric_limits<double>::infinity();
    for (const auto& seg : abandoned) floor_dist = std::min(floor_dist, distance_to_path(p, seg));
    double d = 0.0;
    if (mode == ScoreMode::kMixture) {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        d += match.candidates[k].probability * std::min(floor_dist, distance_to_path(p, candidates[k]));
      }
    } else {
      d = std::min(floor_dist, distance_to_path(p, candidates.front()));
    }
    report.errors.push_back({held.index, d});
  }
  summarize(report);
  return report;
}

EvalReport crossvalidate_baseline(const RoadNetwork& net, const Trajectory& traj, double fraction, Rng& rng) {
  const auto split = trajectory::split_holdout(traj, fraction, rng);
  const auto path = net.path_planar(baseline_match(net, split.train).edges);
  EvalReport report = make_report(Matcher::kBaseline, fraction, FilterParams{});
  for (const auto& held : split.test) {
    report.errors.push_back({held.index, distance_to_path(net.projection().project(held.point.position), path)});
  }
  summarize(report);
  return report;
}

std::optional<std::vector<EdgeId>> shortest_path(const RoadNetwork& net, roadnet::NodeId from, roadnet::NodeId to) {
  using roadnet::NodeId;
  if (from == to) return std::vector<EdgeId>{};
  struct Entry {
    double dist;
    NodeId node;
    bool operator>(const Entry& o) const { return dist != o.dist ? dist > o.dist : node > o.node; }
  };
  std::unordered_map<NodeId, double> dist{{from, 0.0}};
  std::unordered_map<NodeId, EdgeId> via;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.push({0.0, from});
  while (!queue.empty()) {
    const Entry top = queue.top();
    queue.pop();
    if (top.dist > dist[top.node]) continue;
    if (top.node == to) break;
    for (EdgeId id : net.out_edges(top.node)) {
      const auto& e = net.edge(id);
      const double nd = top.dist + e.length;
      auto it = dist.find(e.to);
      if (it == dist.end() || nd < it->second) {
        dist[e.to] = nd;
        via[e.to] = id;
        queue.push({nd, e.to});
      }
    }
  }
  if (!via.contains(to)) return std::nullopt;
  std::vector<EdgeId> path;
  for (NodeId n = to; n != from;) {
    const EdgeId id = via.at(n);
    path.push_back(id);
    n = net.edge(id).from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

roadnet::EdgeMatch snap(const RoadNetwork& net, const GpsPoint& p, std::size_t index) {
  const auto matches = net.edges_within_radius(p.position, kBaselineSnapRadius);
  if (matches.empty()) {
    throw EvalError("baseline: point " + std::to_string(index) + " is more than " +
                    std::to_string(kBaselineSnapRadius) + " m from every edge");
  }
  constexpr double kTie = 1e-3;
  const roadnet::EdgeMatch* best = &matches.front();
  double best_turn = geo::angle_difference(net.heading_at(best->position), p.bearing);
  for (const auto& m : matches) {
    if (m.dist > matches.front().dist + kTie) break;
    const double turn = geo::angle_difference(net.heading_at(m.position), p.bearing);
    if (turn < best_turn) {
      best = &m;
      best_turn = turn;
    }
  }
  return *best;
}

}  // namespace

CandidatePath baseline_match(const RoadNetwork& net, const Trajectory& traj) {
  std::vector<EdgeId> path{snap(net, traj[0], 0).edge};
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const auto s = snap(net, traj[i], i);
    const bool recent = path.back() == s.edge || (path.size() >= 2 && path[path.size() - 2] == s.edge);
    if (recent) continue;
    const auto link = shortest_path(net, net.edge(path.back()).to, net.edge(s.edge).from);
    if (!link) {
      throw EvalError("baseline: no network path between the snaps of points " + std::to_string(i - 1) + " and " +
                      std::to_string(i));
    }
    path.insert(path.end(), link->begin(), link->end());
    path.push_back(s.edge);
  }
  return {std::move(path), 1.0, 1};
}

SweepReport sweep(const RoadNetwork& net, const Trajectory& base, const FilterParams& params, SweepAxis axis,
                  std::span<const double> levels, std::size_t trials, Rng& rng) {
  if (levels.empty()) throw EvalError("sweep needs at least one level");
  if (trials < 1) throw EvalError("sweep needs at least one trial");
  constexpr double kFraction = 0.1;
  const std::uint64_t master = rng();

  SweepReport report;
  report.axis = axis;
  report.levels.assign(levels.begin(), levels.end());
  report.trials = trials;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    SweepLevel level;
    level.level = levels[li];
    level.filter = make_report(Matcher::kParticleFilter, kFraction, params);
    level.baseline = make_report(Matcher::kBaseline, kFraction, FilterParams{});
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const std::uint64_t trial_seed = mix_seed(master, li, trial);
      std::optional<Trajectory> degraded;
      try {
        if (axis == SweepAxis::kNoiseSigma) {
          Rng noise_rng = make_stream(trial_seed, 0);
          degraded = trajectory::perturb(base, levels[li], net.projection(), noise_rng);
        } else {
          degraded = trajectory::downsample(base, levels[li]);
        }
      } catch (const Error& e) {
        level.filter_failures.push_back(e.what());
        level.baseline_failures.push_back(e.what());
        continue;
      }

      FilterParams trial_params = params;
      trial_params.seed = mix_seed(trial_seed, 2);
      try {
        Rng split_rng = make_stream(trial_seed, 1);
        auto r = crossvalidate(net, *degraded, trial_params, kFraction, split_rng);
        level.filter.errors.insert(level.filter.errors.end(), r.errors.begin(), r.errors.end());
        level.filter.recovery_events += r.recovery_events;
      } catch (const Error& e) {
        level.filter_failures.push_back(e.what());
      }
      try {
        Rng split_rng = make_stream(trial_seed, 1);
        auto r = crossvalidate_baseline(net, *degraded, kFraction, split_rng);
        level.baseline.errors.insert(level.baseline.errors.end(), r.errors.begin(), r.errors.end());
      } catch (const Error& e) {
        level.baseline_failures.push_back(e.what());
      }
    }
    summarize(level.filter);
    summarize(level.baseline);
    report.results.push_back(std::move(level));
  }
  return report;
}

}  // namespace pfmm::eval
