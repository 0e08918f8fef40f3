// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [AC1 AC2 ...]   (default: all)
// Exits nonzero when any selected criterion fails.
//
// Seeds are fixed per criterion: simulations use Rng(n), sweeps and holdout
// splits use Rng(100 + n) for criterion n.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "exact_posterior.hpp"
#include "networks.hpp"
#include "pfmm/eval.hpp"
#include "pfmm/filter.hpp"
#include "pfmm/fixtures.hpp"
#include "pfmm/io.hpp"
#include "pfmm/simulate.hpp"

using namespace pfmm;
using filter::FilterParams;
using roadnet::EdgeId;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string data(const std::string& name) { return std::string(PFMM_DATA_DIR) + "/" + name; }

oracle::PathPosterior as_posterior(const filter::MatchResult& r) {
  oracle::PathPosterior out;
  for (const auto& c : r.candidates) out[c.edges] = c.probability;
  return out;
}

bool connected(const roadnet::RoadNetwork& net, const std::vector<EdgeId>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (net.edge(path[i - 1]).to != net.edge(path[i]).from) return false;
  }
  return true;
}

// Oracle equivalence on the bundled Y junction.
void ac1(Outcome& out) {
  const Stopwatch clock;
  const auto net = io::read_network(data("y_junction.geojson"));
  struct Case {
    const char* file;
    double measurement_sigma;
  };
  double asym_left = 0.0;
  for (const Case c : {Case{"y_fork_symmetric.csv", 5.0}, Case{"y_fork_asymmetric.csv", 10.0},
                       Case{"y_left_continuation.csv", 5.0}}) {
    const auto traj = trajectory::read_trajectory(data(c.file));
    FilterParams p;
    p.particle_count = 100'000;
    p.measurement_sigma = c.measurement_sigma;
    p.seed = 1;
    const auto result = filter::run_filter(net, traj, p);
    const double l1 = oracle::l1_distance(oracle::exact_posterior(net, traj, p), as_posterior(result));
    out.detail << c.file << " L1=" << l1 << "; ";
    out.require(l1 <= 0.05, std::string(c.file) + " L1 <= 0.05");
    if (std::string(c.file) == "y_fork_asymmetric.csv") {
      for (const auto& cand : result.candidates) {
        if (cand.edges == std::vector<EdgeId>{fixtures::kYInbound, fixtures::kYLeft}) asym_left = cand.probability;
      }
    }
  }
  const double expected = std::exp(1.0) / (1.0 + std::exp(1.0));
  out.detail << "asymmetric left=" << asym_left << " (hand-computed " << expected << "); ";
  out.require(std::abs(asym_left - expected) <= 0.02, "asymmetric split within 0.02");
  const double t = clock.seconds();
  out.detail << "runtime " << t << " s";
  out.require(t < 30.0, "runtime < 30 s");
}

// Step-by-step invariants of the filter loop, then bit-reproducibility.
void ac2(Outcome& out) {
  const Stopwatch clock;
  const auto net = fixtures::grid_network(20, 100);
  simulate::SimConfig cfg;
  Rng sim_rng(2);
  const auto traj = simulate::simulate(net, cfg, sim_rng).trajectory;

  std::size_t weighs = 0, resamples = 0, history_checks = 0;
  double worst_norm = 0.0;
  bool count_ok = true, histories_ok = true, degenerate = false;
  auto check_histories = [&](const filter::ParticleSet& set) {
    for (const auto& particle : set.particles) {
      ++history_checks;
      if (particle.history.empty() || particle.history.back() != particle.state.edge ||
          !connected(net, particle.history)) {
        histories_ok = false;
      }
    }
  };

  for (auto mode : {filter::ResampleMode::kEveryStep, filter::ResampleMode::kAdaptive}) {
    FilterParams p;
    p.resample_mode = mode;
    p.seed = 2;
    Rng init = make_stream(p.seed, 0, filter::kInitStream);
    auto set = filter::initialize(net, traj[0], p, init);
    check_histories(set);
    for (std::size_t t = 1; t < traj.size() && !degenerate; ++t) {
      set = filter::propagate(net, std::move(set), filter::control_distance(traj[t - 1], traj[t], net.projection()), p);
      check_histories(set);
      auto weighed = filter::weigh(std::move(set), traj[t], p, net);
      if (weighed.degenerate) {
        degenerate = true;
        break;
      }
      set = std::move(weighed.set);
      ++weighs;
      double sum = 0.0;
      for (const auto& particle : set.particles) sum += particle.weight;
      worst_norm = std::max(worst_norm, std::abs(sum - 1.0));
      if (mode == filter::ResampleMode::kEveryStep || weighed.ess < p.ess_threshold * p.particle_count) {
        Rng rs = make_stream(p.seed, t, filter::kResampleStream);
        set = filter::resample(set, p, rs);
        ++resamples;
        count_ok = count_ok && set.particles.size() == p.particle_count;
        check_histories(set);
      }
    }
  }
  out.detail << weighs << " weighs, max |sum w - 1|=" << worst_norm << "; " << resamples << " resamples; "
             << history_checks << " history checks; ";
  out.require(!degenerate, "no degeneracy on the invariant trajectory");
  out.require(worst_norm < 1e-9, "weights normalised");
  out.require(count_ok, "M particles after every resample");
  out.require(histories_ok, "connected histories");

  FilterParams p;
  p.seed = 22;
  const auto a = filter::run_filter(net, traj, p);
  const auto b = filter::run_filter(net, traj, p);
  double total = 0.0;
  for (const auto& c : a.candidates) {
    total += c.probability;
    out.require(connected(net, c.edges), "candidate path connected");
  }
  out.detail << "candidate sum=" << total << "; ";
  out.require(std::abs(total - 1.0) < 1e-9, "candidate probabilities sum to 1");
  out.require(io::dump(io::to_json(a)) == io::dump(io::to_json(b)), "bit-reproducible under a fixed seed");
  const double t = clock.seconds();
  out.detail << "runtime " << t << " s";
  out.require(t < 60.0, "runtime < 60 s");
}

// Multinomial copy counts of resample().
void ac3(Outcome& out) {
  const std::vector<double> w{0.02, 0.04, 0.06, 0.08, 0.10, 0.11, 0.12, 0.14, 0.15, 0.18};
  filter::ParticleSet set;
  for (std::size_t i = 0; i < w.size(); ++i) {
    set.particles.push_back({{EdgeId{i}, 0.0}, {EdgeId{i}}, w[i]});
  }
  FilterParams p;
  p.particle_count = w.size();
  constexpr std::size_t kTrials = 10'000;
  std::vector<double> copies(w.size(), 0.0), copies_sq(w.size(), 0.0);
  Rng rng(103);
  for (std::size_t trial = 0; trial < kTrials; ++trial) {
    std::vector<double> c(w.size(), 0.0);
    for (const auto& particle : filter::resample(set, p, rng).particles) c[roadnet::value(particle.state.edge)] += 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      copies[i] += c[i];
      copies_sq[i] += c[i] * c[i];
    }
  }
  // Per trial, copies of particle i ~ Binomial(M, w_i); the trial mean has
  // sd sqrt(M w (1 - w) / trials).
  const double m = static_cast<double>(w.size());
  const double n = static_cast<double>(kTrials);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double mean = copies[i] / n;
    const double var = m * w[i] * (1.0 - w[i]);
    const double z = (mean - m * w[i]) / std::sqrt(var / n);
    worst_z = std::max(worst_z, std::abs(z));
    // Sample variance of a binomial count: its sd is about
    // sqrt((mu4 - var^2) / n); mu4 from the binomial central moments.
    const double sample_var = copies_sq[i] / n - mean * mean;
    const double q = w[i] * (1.0 - w[i]);
    const double mu4 = m * q * (1.0 + 3.0 * (m - 2.0) * q);
    const double var_sd = std::sqrt((mu4 - var * var) / n);
    out.require(std::abs(sample_var - var) <= 3.0 * var_sd, "copy-count variance of particle " + std::to_string(i));
  }
  out.detail << kTrials << " trials, M=10, worst mean z=" << worst_z;
  out.require(worst_z <= 3.0, "copy-count means within 3 sigma");
}

// Synthetic fidelity on the 20x20 grid.
void ac4(Outcome& out) {
  const Stopwatch clock;
  const auto net = fixtures::grid_network(20, 100);
  int good = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    simulate::SimConfig cfg;
    Rng sim_rng(mix_seed(4, trial));
    const auto sim = simulate::simulate(net, cfg, sim_rng);
    FilterParams p;
    p.seed = mix_seed(104, trial);
    Rng split(mix_seed(104, trial, 1));
    const auto report = eval::crossvalidate(net, sim.trajectory, p, 0.1, split);
    const auto full = filter::run_filter(net, sim.trajectory, p);
    const double overlap = simulate::path_overlap(full.best().edges, sim.truth.path, net);
    const bool ok = report.p50 <= 10.0 && overlap >= 0.9;
    good += ok ? 1 : 0;
    out.detail << "(p50 " << report.p50 << ", overlap " << overlap << ") ";
  }
  const double t = clock.seconds();
  out.detail << "-> " << good << "/10 trials; runtime " << t << " s";
  out.require(good >= 8, ">= 8 of 10 trials");
  out.require(t < 300.0, "runtime < 5 min");
}

// Noise sweep on a noise-free base, so each level is the actual noise.
void ac5(Outcome& out) {
  const auto net = fixtures::grid_network(20, 100);
  simulate::SimConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.duration = 599;
  Rng sim_rng(5);
  const auto base = simulate::simulate(net, cfg, sim_rng).trajectory;
  const std::vector<double> levels{5, 10, 20};
  Rng rng(105);
  const auto report = eval::sweep(net, base, FilterParams{}, eval::SweepAxis::kNoiseSigma, levels, 10, rng);
  for (const auto& l : report.results) {
    out.detail << "noise " << l.level << ": filter p50 " << l.filter.p50 << " baseline p50 " << l.baseline.p50
               << " (failed trials " << l.filter_failures.size() << "/" << l.baseline_failures.size() << "); ";
  }
  const double ratio = report.results[2].filter.p50 / report.results[0].filter.p50;
  out.detail << "ratio 20/5 = " << ratio;
  out.require(ratio <= 4.0, "p50(20) <= 4 p50(5)");
}

// Sampling-interval sweep. The base speed is not a divisor of the block
// length, so fixes at 10/30/60 s do not all land at the same block phase.
void ac6(Outcome& out) {
  const auto net = fixtures::grid_network(20, 100);
  simulate::SimConfig cfg;
  cfg.speed = 9.3;
  cfg.duration = 3599;
  Rng sim_rng(6);
  const auto base = simulate::simulate(net, cfg, sim_rng).trajectory;
  const std::vector<double> levels{1, 10, 30, 60};
  Rng rng(106);
  const auto report = eval::sweep(net, base, FilterParams{}, eval::SweepAxis::kSamplingInterval, levels, 10, rng);
  bool monotone = true;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& l = report.results[i];
    out.detail << "interval " << l.level << ": filter p50 " << l.filter.p50 << " baseline p50 " << l.baseline.p50
               << " (failed trials " << l.filter_failures.size() << "/" << l.baseline_failures.size() << "); ";
    if (i > 0) monotone = monotone && l.filter.p50 >= report.results[i - 1].filter.p50;
  }
  const double filter_delta = report.results.back().filter.p50 - report.results.front().filter.p50;
  const double baseline_delta = report.results.back().baseline.p50 - report.results.front().baseline.p50;
  out.detail << "1->60 s increase: filter " << filter_delta << ", baseline " << baseline_delta;
  out.require(monotone, "filter p50 non-decreasing");
  out.require(baseline_delta < filter_delta, "baseline degrades less than the filter");
}

// Geometry oracles.
void ac7(Outcome& out) {
  const auto net = pfmm::testing::random_network(80, 300, 7);
  Rng rng(107);
  std::uniform_real_distribution<double> coord(-100, 1100), radius(1.0, 150.0);
  std::size_t mismatches = 0, hits = 0;
  for (int q = 0; q < 1000; ++q) {
    const auto p = net.projection().project(fixtures::at_meters(coord(rng), coord(rng)));
    const double r = radius(rng);
    std::vector<std::pair<double, EdgeId>> want;
    for (const auto& e : net.edges()) {
      double best = INFINITY;
      for (std::size_t s = 0; s + 1 < e.planar.size(); ++s) {
        best = std::min(best, geo::point_segment_projection(p, e.planar[s], e.planar[s + 1]).dist);
      }
      if (best <= r) want.emplace_back(best, e.id);
    }
    std::sort(want.begin(), want.end());
    const auto got = net.edges_within_radius(p, r);
    hits += got.size();
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].edge == want[i].second && std::abs(got[i].dist - want[i].first) <= 1e-9;
    }
    mismatches += same ? 0 : 1;
  }
  out.detail << "radius queries: " << mismatches << "/1000 differ from brute force (" << hits << " hits); ";
  out.require(mismatches == 0, "edges_within_radius equals brute force");

  std::uniform_real_distribution<double> c(-100, 100);
  std::uniform_int_distribution<int> vertices(2, 6);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<geo::PlanarPoint> line(static_cast<std::size_t>(vertices(rng)));
    for (auto& v : line) v = {c(rng), c(rng)};
    const geo::PlanarPoint p{c(rng), c(rng)};
    double dense = INFINITY;
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
      const double dx = line[s + 1].x - line[s].x, dy = line[s + 1].y - line[s].y;
      const auto n = static_cast<std::size_t>(std::ceil(std::hypot(dx, dy) / 0.01));
      for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        dense = std::min(dense, std::hypot(p.x - line[s].x - t * dx, p.y - line[s].y - t * dy));
      }
    }
    worst = std::max(worst, std::abs(eval::distance_to_path(p, line) - dense));
  }
  out.detail << "distance_to_path worst deviation from 0.01 m sampling " << worst << " m";
  out.require(worst <= 0.02, "distance_to_path within 0.02 m");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}};
  std::vector<std::string> selected(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    Outcome out;
    try {
      run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    all_pass = all_pass && out.pass;
    std::printf("%s %s: %s\n", name.c_str(), out.pass ? "PASS" : "FAIL", out.detail.str().c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
