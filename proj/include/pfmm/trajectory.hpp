#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pfmm/geo.hpp"
#include "pfmm/random.hpp"

namespace pfmm::trajectory {

// One GPS fix. Bearing is degrees clockwise from north in [0, 360);
// timestamp is seconds.
struct GpsPoint {
  geo::GeoPoint position;
  double bearing = 0.0;
  double timestamp = 0.0;

  friend bool operator==(const GpsPoint&, const GpsPoint&) = default;
};

// Throws pfmm::Error on non-finite or out-of-range fields.
void validate(const GpsPoint& p);

/// Ordered GPS fixes with strictly increasing timestamps, at least two.
class Trajectory {
 public:
  // Throws pfmm::Error when the invariants do not hold.
  explicit Trajectory(std::vector<GpsPoint> points);

  const std::vector<GpsPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const GpsPoint& operator[](std::size_t i) const { return points_[i]; }
  const GpsPoint& front() const { return points_.front(); }
  const GpsPoint& back() const { return points_.back(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<GpsPoint> points_;
};

struct HeldOutPoint {
  std::size_t index = 0;  // position in the original trajectory
  GpsPoint point;
};

struct HoldoutSplit {
  Trajectory train;
  std::vector<HeldOutPoint> test;  // ascending by index
};

// CSV with header `timestamp,lat,lon,bearing`. Errors carry 1-based line
// numbers.
Trajectory parse_trajectory(std::string_view text);
Trajectory read_trajectory(const std::string& path);
// Shortest round-trip decimal formatting, LF line endings.
std::string format_trajectory(const Trajectory& traj);

// Adds independent zero-mean Gaussian offsets of standard deviation sigma to
// each planar axis, in a local frame centred on the first point. Bearings and
// timestamps are untouched; sigma == 0 returns an identical copy.
Trajectory perturb(const Trajectory& traj, double sigma, Rng& rng);
Trajectory perturb(const Trajectory& traj, double sigma, const geo::LocalProjection& frame, Rng& rng);

// Keeps the first point, then every point at least `interval` seconds after
// the previously kept one, and always the last point.
Trajectory downsample(const Trajectory& traj, double interval);

// Moves floor(fraction * N) points, drawn uniformly without replacement from
// indices 1..N-1, into the test set. Requires 0 < fraction < 0.5 and at
// least two remaining training points.
HoldoutSplit split_holdout(const Trajectory& traj, double fraction, Rng& rng);

// Number of points split_holdout removes from an N-point trajectory.
std::size_t holdout_count(std::size_t n, double fraction) noexcept;

}  // namespace pfmm::trajectory
