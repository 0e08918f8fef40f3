// pfmm: particle-filter map matching from the command line.
//
// Exit codes: 0 success, 1 bad input or flags, 2 algorithmic failure,
// 3 partial result (truncated simulation, sweep with failed trials).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pfmm/error.hpp"
#include "pfmm/eval.hpp"
#include "pfmm/filter.hpp"
#include "pfmm/io.hpp"
#include "pfmm/simulate.hpp"
#include "pfmm/trajectory.hpp"

namespace {

using namespace pfmm;

enum Exit : int { kOk = 0, kInput = 1, kAlgorithm = 2, kPartial = 3 };

void add_filter_flags(CLI::App& cmd, filter::FilterParams& p) {
  cmd.add_option("--particle-count", p.particle_count, "particles M")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd.add_option("--init-pos-sigma", p.init_pos_sigma, "initial position spread per axis (m)")
      ->capture_default_str();
  cmd.add_option("--init-bearing-sigma", p.init_bearing_sigma, "initial bearing spread (deg)")
      ->capture_default_str();
  cmd.add_option("--init-radius", p.init_radius, "no edge this close to the first fix => unmatchable (m)")
      ->capture_default_str();
  cmd.add_option("--bearing-gate", p.bearing_gate, "max heading mismatch for an initial particle (deg)")
      ->capture_default_str();
  cmd.add_option("--snap-tolerance", p.snap_tolerance, "initial proposals this close to an edge snap onto it (m)")
      ->capture_default_str();
  cmd.add_option("--transition-sigma", p.transition_sigma, "floor of the travel-distance noise (m)")
      ->capture_default_str();
  cmd.add_option("--transition-sigma-fraction", p.transition_sigma_fraction,
                 "travel-distance noise as a fraction of the control")
      ->capture_default_str();
  cmd.add_option("--measurement-sigma", p.measurement_sigma, "GPS error of the likelihood (m)")
      ->capture_default_str();
  cmd.add_flag("--allow-uturn", p.allow_uturn, "let particles turn back at intersections");
  static const std::map<std::string, filter::ResampleMode> modes{
      {"every_step", filter::ResampleMode::kEveryStep}, {"adaptive", filter::ResampleMode::kAdaptive}};
  cmd.add_option("--resample-mode", p.resample_mode, "every_step or adaptive")
      ->transform(CLI::CheckedTransformer(modes))
      ->default_str("every_step");
  cmd.add_option("--ess-threshold", p.ess_threshold, "adaptive mode resamples when ESS < this * M")
      ->capture_default_str();
}

struct Inputs {
  std::string network;
  std::string trajectory;
};

void add_inputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--network", in.network, "road network GeoJSON")->required();
  cmd.add_option("--trajectory", in.trajectory, "trajectory CSV (timestamp,lat,lon,bearing)")->required();
}

void write(const std::string& path, const std::string& text) {
  if (!path.empty()) io::write_file_atomic(path, text);
}

int cmd_match(const Inputs& in, const filter::FilterParams& params, const std::string& out_geojson,
              const std::string& out_report) {
  const auto net = io::read_network(in.network);
  const auto traj = trajectory::read_trajectory(in.trajectory);
  const auto result = filter::run_filter(net, traj, params);
  write(out_geojson, io::dump(io::match_to_geojson(net, result)));
  write(out_report, io::dump(io::to_json(result)));
  const auto& top = result.candidates.front();
  std::printf("candidates=%zu top_probability=%.6g recovery_events=%zu\n", result.candidates.size(),
              top.probability, result.recovery_events);
  return kOk;
}

int cmd_eval(const Inputs& in, const filter::FilterParams& params, double fraction, eval::Matcher matcher,
             eval::ScoreMode mode, const std::string& out) {
  const auto net = io::read_network(in.network);
  const auto traj = trajectory::read_trajectory(in.trajectory);
  Rng rng = make_stream(params.seed, 0);
  auto report = matcher == eval::Matcher::kBaseline ? eval::crossvalidate_baseline(net, traj, fraction, rng)
                                                    : eval::crossvalidate(net, traj, params, fraction, rng, mode);
  write(out, io::dump(io::to_json(report)));
  std::printf("matcher=%s n=%zu p25=%.4f p50=%.4f p75=%.4f\n", eval::to_string(report.matcher),
              report.errors.size(), report.p25, report.p50, report.p75);
  return kOk;
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error("--levels: '" + item + "' is not a number");
    levels.push_back(v);
  }
  if (levels.empty() || text.back() == ',') throw Error("--levels must be a comma-separated list of numbers");
  return levels;
}

int cmd_sweep(const Inputs& in, const filter::FilterParams& params, eval::SweepAxis axis,
              const std::vector<double>& levels, std::size_t trials, const std::string& out,
              const std::string& out_csv) {
  const auto net = io::read_network(in.network);
  const auto traj = trajectory::read_trajectory(in.trajectory);
  Rng rng = make_stream(params.seed, 1);
  const auto report = eval::sweep(net, traj, params, axis, levels, trials, rng);
  write(out, io::dump(io::to_json(report)));
  write(out_csv, io::sweep_errors_csv(report));
  bool partial = false;
  for (const auto& r : report.results) {
    std::printf("%s=%g particle_filter_p50=%.4f baseline_p50=%.4f failures=%zu/%zu\n", eval::to_string(axis),
                r.level, r.filter.p50, r.baseline.p50, r.filter_failures.size(), r.baseline_failures.size());
    partial = partial || !r.filter_failures.empty() || !r.baseline_failures.empty();
  }
  return partial ? kPartial : kOk;
}

int cmd_simulate(const std::string& network, const simulate::SimConfig& cfg, const std::string& out_csv,
                 const std::string& out_truth) {
  cfg.validate();
  const auto net = io::read_network(network);
  Rng rng(cfg.seed);
  const auto sim = simulate::simulate(net, cfg, rng);
  write(out_csv, trajectory::format_trajectory(sim.trajectory));
  write(out_truth, io::dump(io::to_json(sim.truth)));
  std::printf("fixes=%zu path_edges=%zu truncated=%s\n", sim.trajectory.size(), sim.truth.path.size(),
              sim.truth.truncated ? "true" : "false");
  if (sim.truth.truncated) {
    std::fprintf(stderr, "pfmm: walk reached a dead end; trajectory is shorter than --duration\n");
    return kPartial;
  }
  return kOk;
}

int cmd_perturb(const std::string& input, double sigma, double interval, std::uint64_t seed,
                const std::string& out) {
  if (!(sigma >= 0.0)) throw Error("--noise-sigma must be >= 0");
  if (!(interval > 0.0)) throw Error("--interval must be > 0");
  // Downsample first so the noise stream does not depend on the dropped points.
  const auto traj = trajectory::read_trajectory(input);
  Rng rng(seed);
  const auto result = trajectory::perturb(trajectory::downsample(traj, interval), sigma, rng);
  write(out, trajectory::format_trajectory(result));
  std::printf("points_in=%zu points_out=%zu\n", traj.size(), result.size());
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Particle-filter map matching of GPS trajectories"};
  app.require_subcommand(1);

  filter::FilterParams params;
  Inputs in;

  auto* match = app.add_subcommand("match", "match a trajectory and rank candidate paths");
  add_inputs(*match, in);
  add_filter_flags(*match, params);
  std::string match_geojson, match_report;
  match->add_option("--output", match_geojson, "candidate paths GeoJSON")->required();
  match->add_option("--report", match_report, "MatchResult JSON");

  auto* evalc = app.add_subcommand("eval", "holdout cross-validation");
  add_inputs(*evalc, in);
  add_filter_flags(*evalc, params);
  double fraction = 0.1;
  evalc->add_option("--holdout-fraction", fraction, "fraction of points held out")->capture_default_str();
  eval::Matcher matcher = eval::Matcher::kParticleFilter;
  evalc->add_option("--matcher", matcher, "particle_filter or baseline")
      ->transform(CLI::CheckedTransformer(std::map<std::string, eval::Matcher>{
          {"particle_filter", eval::Matcher::kParticleFilter}, {"baseline", eval::Matcher::kBaseline}}))
      ->default_str("particle_filter");
  eval::ScoreMode mode = eval::ScoreMode::kMostLikely;
  evalc->add_option("--score", mode, "most_likely or mixture")
      ->transform(CLI::CheckedTransformer(std::map<std::string, eval::ScoreMode>{
          {"most_likely", eval::ScoreMode::kMostLikely}, {"mixture", eval::ScoreMode::kMixture}}))
      ->default_str("most_likely");
  std::string eval_out;
  evalc->add_option("--output", eval_out, "EvalReport JSON")->required();

  auto* sweepc = app.add_subcommand("sweep", "noise or sampling-interval sensitivity of both matchers");
  add_inputs(*sweepc, in);
  add_filter_flags(*sweepc, params);
  eval::SweepAxis axis = eval::SweepAxis::kNoiseSigma;
  sweepc->add_option("--axis", axis, "noise or interval")
      ->required()
      ->transform(CLI::CheckedTransformer(std::map<std::string, eval::SweepAxis>{
          {"noise", eval::SweepAxis::kNoiseSigma}, {"interval", eval::SweepAxis::kSamplingInterval}}));
  std::string levels_text;
  sweepc->add_option("--levels", levels_text, "comma-separated levels (m or s)")->required();
  std::size_t trials = 10;
  sweepc->add_option("--trials", trials, "trials per level")->capture_default_str()->check(CLI::PositiveNumber);
  std::string sweep_out, sweep_csv;
  sweepc->add_option("--output", sweep_out, "SweepReport JSON")->required();
  sweepc->add_option("--errors-csv", sweep_csv, "pooled per-point errors CSV");

  auto* sim = app.add_subcommand("simulate", "drive a random vehicle over the network");
  std::string sim_network, sim_csv, sim_truth;
  simulate::SimConfig cfg;
  sim->add_option("--network", sim_network, "road network GeoJSON")->required();
  sim->add_option("--speed", cfg.speed, "m/s")->capture_default_str();
  sim->add_option("--duration", cfg.duration, "s")->capture_default_str();
  sim->add_option("--sample-interval", cfg.sample_interval, "s")->capture_default_str();
  sim->add_option("--noise-sigma", cfg.noise_sigma, "GPS noise per planar axis (m)")->capture_default_str();
  sim->add_option("--bearing-noise-sigma", cfg.bearing_noise_sigma, "deg")->capture_default_str();
  sim->add_flag("--allow-uturn", cfg.allow_uturn, "allow turning back at intersections");
  sim->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sim->add_option("--output", sim_csv, "trajectory CSV")->required();
  sim->add_option("--truth", sim_truth, "ground truth JSON")->required();

  auto* pert = app.add_subcommand("perturb", "downsample, then add planar noise to a trajectory");
  std::string pert_in, pert_out;
  double pert_sigma = 0.0, pert_interval = 1.0;
  std::uint64_t pert_seed = 0;
  pert->add_option("--trajectory", pert_in, "input CSV")->required();
  pert->add_option("--noise-sigma", pert_sigma, "m per planar axis")->capture_default_str();
  pert->add_option("--interval", pert_interval, "keep one point per this many seconds")->capture_default_str();
  pert->add_option("--seed", pert_seed, "RNG seed")->capture_default_str();
  pert->add_option("--output", pert_out, "output CSV")->required();

  for (auto* cmd : {match, evalc, sweepc}) cmd->add_option("--seed", params.seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*match) return cmd_match(in, params, match_geojson, match_report);
    if (*evalc) return cmd_eval(in, params, fraction, matcher, mode, eval_out);
    if (*sweepc) return cmd_sweep(in, params, axis, parse_levels(levels_text), trials, sweep_out, sweep_csv);
    if (*sim) return cmd_simulate(sim_network, cfg, sim_csv, sim_truth);
    if (*pert) return cmd_perturb(pert_in, pert_sigma, pert_interval, pert_seed, pert_out);
  } catch (const FilterError& e) {
    std::cerr << "pfmm: " << e.what() << '\n';
    return kAlgorithm;
  } catch (const SimulationError& e) {
    std::cerr << "pfmm: " << e.what() << '\n';
    return kAlgorithm;
  } catch (const EvalError& e) {
    std::cerr << "pfmm: " << e.what() << '\n';
    return kAlgorithm;
  } catch (const std::exception& e) {
    std::cerr << "pfmm: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
