#include <doctest.h>

#include <cmath>

#include "networks.hpp"
#include "pfmm/error.hpp"
#include "pfmm/fixtures.hpp"
#include "pfmm/simulate.hpp"

using namespace pfmm;
using simulate::path_overlap;
using simulate::SimConfig;
using roadnet::EdgeId;
using roadnet::NodeId;

TEST_CASE("SimConfig validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  c.duration = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SimConfig{};
  c.speed = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SimConfig{};
  c.noise_sigma = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("simulate") {
  const auto net = fixtures::grid_network(10, 100);

  SUBCASE("noise 0 puts every fix on its true position") {
    SimConfig cfg;
    cfg.noise_sigma = 0.0;
    Rng rng(1);
    const auto sim = simulate::simulate(net, cfg, rng);
    REQUIRE(sim.trajectory.size() == sim.truth.positions.size());
    for (std::size_t i = 0; i < sim.trajectory.size(); ++i) {
      const auto truth = net.position_to_planar(sim.truth.positions[i]);
      const auto fix = net.projection().project(sim.trajectory[i].position);
      CHECK(geo::planar_distance(truth, fix) < 1e-6);
    }
  }

  SUBCASE("speed 10, interval 1, duration 100") {
    SimConfig cfg;
    cfg.duration = 100;
    cfg.noise_sigma = 0.0;
    Rng rng(2);
    const auto sim = simulate::simulate(net, cfg, rng);
    REQUIRE(sim.trajectory.size() == 101);
    CHECK_FALSE(sim.truth.truncated);
    for (std::size_t i = 0; i < sim.trajectory.size(); ++i) CHECK(sim.trajectory[i].timestamp == static_cast<double>(i));

    // Consecutive true positions are 10 m apart along the ground-truth path.
    std::vector<double> along;
    std::size_t k = 0;
    double before = 0.0;
    for (const auto& pos : sim.truth.positions) {
      while (sim.truth.path[k] != pos.edge) before += net.edge(sim.truth.path[k++]).length;
      along.push_back(before + pos.offset);
    }
    for (std::size_t i = 1; i < along.size(); ++i) CHECK(along[i] - along[i - 1] == doctest::Approx(10.0).epsilon(1e-9));
  }

  SUBCASE("ground truth is a connected path containing every position") {
    SimConfig cfg;
    Rng rng(3);
    const auto sim = simulate::simulate(net, cfg, rng);
    for (std::size_t i = 1; i < sim.truth.path.size(); ++i) {
      CHECK(net.edge(sim.truth.path[i - 1]).to == net.edge(sim.truth.path[i]).from);
    }
    for (const auto& pos : sim.truth.positions) {
      CHECK(std::find(sim.truth.path.begin(), sim.truth.path.end(), pos.edge) != sim.truth.path.end());
      CHECK(pos.offset >= 0.0);
      CHECK(pos.offset <= net.edge(pos.edge).length);
    }
    CHECK_NOTHROW(net.path_geometry(sim.truth.path));
  }

  SUBCASE("seeded determinism") {
    SimConfig cfg;
    Rng a(4), b(4);
    const auto s1 = simulate::simulate(net, cfg, a);
    const auto s2 = simulate::simulate(net, cfg, b);
    CHECK(trajectory::format_trajectory(s1.trajectory) == trajectory::format_trajectory(s2.trajectory));
    CHECK(s1.truth.path == s2.truth.path);
  }

  SUBCASE("planar noise has the configured spread") {
    SimConfig cfg;
    cfg.duration = 12'000;
    cfg.noise_sigma = 8.0;
    Rng rng(5);
    const auto sim = simulate::simulate(fixtures::grid_network(20, 100), cfg, rng);
    const auto big = fixtures::grid_network(20, 100);
    double sx = 0, sxx = 0, sy = 0, syy = 0;
    const double n = static_cast<double>(sim.trajectory.size());
    REQUIRE(n >= 10'000);
    for (std::size_t i = 0; i < sim.trajectory.size(); ++i) {
      const auto truth = big.position_to_planar(sim.truth.positions[i]);
      const auto fix = big.projection().project(sim.trajectory[i].position);
      sx += fix.x - truth.x;
      sxx += (fix.x - truth.x) * (fix.x - truth.x);
      sy += fix.y - truth.y;
      syy += (fix.y - truth.y) * (fix.y - truth.y);
    }
    const double sdx = std::sqrt(sxx / n - (sx / n) * (sx / n));
    const double sdy = std::sqrt(syy / n - (sy / n) * (sy / n));
    CHECK(std::abs(sdx - 8.0) <= 0.4);
    CHECK(std::abs(sdy - 8.0) <= 0.4);
  }

  SUBCASE("dead end truncates the walk") {
    const auto road = pfmm::testing::straight_road(50);
    SimConfig cfg;
    cfg.noise_sigma = 0.0;
    Rng rng(6);
    const auto sim = simulate::simulate(road, cfg, rng);
    CHECK(sim.truth.truncated);
    CHECK(sim.trajectory.size() <= 6);
    // The last fix is the last one reached on schedule, within a step of the end.
    CHECK(sim.truth.positions.back().offset > 40.0);
    CHECK(sim.truth.positions.back().offset <= 50.0);
  }

  SUBCASE("too short to emit two fixes") {
    const auto road = pfmm::testing::straight_road(5);
    SimConfig cfg;
    cfg.speed = 100;
    Rng rng(7);
    CHECK_THROWS_AS(simulate::simulate(road, cfg, rng), SimulationError);
  }
}

TEST_CASE("path_overlap") {
  // Chain of one-way edges 0 (100 m), 2 (200 m), 4 (100 m).
  std::vector<roadnet::Node> nodes{{NodeId{0}, fixtures::at_meters(0, 0)},
                                   {NodeId{1}, fixtures::at_meters(100, 0)},
                                   {NodeId{2}, fixtures::at_meters(300, 0)},
                                   {NodeId{3}, fixtures::at_meters(400, 0)}};
  std::vector<roadnet::EdgeSpec> specs;
  for (std::uint64_t i = 0; i < 3; ++i) {
    specs.push_back({EdgeId{2 * i}, NodeId{i}, NodeId{i + 1}, {nodes[i].location, nodes[i + 1].location}, {}});
  }
  const auto net = roadnet::build_network(nodes, specs);
  const std::vector<EdgeId> truth{EdgeId{0}, EdgeId{2}, EdgeId{4}};

  CHECK(path_overlap(truth, truth, net) == doctest::Approx(1.0));
  CHECK(path_overlap(std::vector<EdgeId>{EdgeId{2}}, std::vector<EdgeId>{EdgeId{0}}, net) == 0.0);
  CHECK(path_overlap(std::vector<EdgeId>{EdgeId{0}, EdgeId{4}}, truth, net) == doctest::Approx(0.5).epsilon(1e-6));
  // multiset: a repeated edge only counts as often as truth has it
  CHECK(path_overlap(std::vector<EdgeId>{EdgeId{0}, EdgeId{0}}, std::vector<EdgeId>{EdgeId{0}}, net) == 1.0);
  CHECK_THROWS_AS(path_overlap(truth, std::vector<EdgeId>{}, net), Error);
}
