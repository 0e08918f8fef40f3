#pragma once

#include <cstddef>
#include <vector>

#include "pfmm/geo.hpp"
#include "pfmm/roadnet.hpp"
#include "pfmm/trajectory.hpp"

// Small synthetic networks used by the bundled data files, tests and the
// acceptance suite. Geometry is laid out in meters around a reference point
// and converted to WGS84 with a local projection. Edge ids follow the GeoJSON
// loader convention (2*id forward, 2*id+1 reverse).
namespace pfmm::fixtures {

// Camden, London.
inline constexpr geo::GeoPoint kReference{51.54, -0.14};

// Square grid of two-way streets: (blocks + 1)^2 intersections spaced
// block_length meters apart, south-west corner at the reference point.
roadnet::RoadNetwork grid_network(std::size_t blocks = 20, double block_length = 100.0);

/// One-way Y junction, coordinates in meters from the reference point:
///   inbound  edge 0: (-200, 0) -> (0, 0)
///   left     edge 2: (0, 0) -> (10, 10) -> (200, 10)
///   right    edge 4: (0, 0) -> (10, -10) -> (200, -10)
/// The branches mirror each other, so equal offsets on both branches lie at
/// equal x.
roadnet::RoadNetwork y_junction();

inline constexpr roadnet::EdgeId kYInbound{0};
inline constexpr roadnet::EdgeId kYLeft{2};
inline constexpr roadnet::EdgeId kYRight{4};

// Point at planar (x, y) meters from the reference point.
geo::GeoPoint at_meters(double x, double y);

struct Fix {
  double t;
  double x;
  double y;
  double bearing;
};

trajectory::Trajectory make_trajectory(const std::vector<Fix>& fixes);

// Approach along the inbound edge, ending between the two branches.
trajectory::Trajectory y_fork_symmetric();
// Same approach, final fix 5 m from the left branch and 15 m from the right.
trajectory::Trajectory y_fork_asymmetric();
// Approach, then two fixes on the left branch.
trajectory::Trajectory y_left_continuation();

}  // namespace pfmm::fixtures
