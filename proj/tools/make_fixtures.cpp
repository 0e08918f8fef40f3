// Regenerates the bundled example data.
//   make_fixtures <output-dir>

#include <cstdio>
#include <exception>
#include <string>

#include "pfmm/fixtures.hpp"
#include "pfmm/io.hpp"
#include "pfmm/simulate.hpp"
#include "pfmm/trajectory.hpp"

using namespace pfmm;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures <output-dir>\n");
    return 1;
  }
  const std::string dir = argv[1];
  try {
    const auto grid = fixtures::grid_network(20, 100.0);
    io::write_file_atomic(dir + "/grid.geojson", io::dump(io::network_to_geojson(grid)));
    io::write_file_atomic(dir + "/y_junction.geojson", io::dump(io::network_to_geojson(fixtures::y_junction())));

    simulate::SimConfig cfg;
    Rng rng(1);
    const auto sim = simulate::simulate(grid, cfg, rng);
    io::write_file_atomic(dir + "/grid_drive.csv", trajectory::format_trajectory(sim.trajectory));
    io::write_file_atomic(dir + "/grid_drive_truth.json", io::dump(io::to_json(sim.truth)));

    io::write_file_atomic(dir + "/y_fork_asymmetric.csv",
                          trajectory::format_trajectory(fixtures::y_fork_asymmetric()));
    io::write_file_atomic(dir + "/y_fork_symmetric.csv", trajectory::format_trajectory(fixtures::y_fork_symmetric()));
    io::write_file_atomic(dir + "/y_left_continuation.csv",
                          trajectory::format_trajectory(fixtures::y_left_continuation()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixtures: %s\n", e.what());
    return 1;
  }
  return 0;
}
