#pragma once

#include <span>

namespace pfmm::geo {

// WGS84 latitude/longitude in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Meters east (x) and north (y) of a projection origin.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

inline constexpr double kMetersPerDegLat = 111'132.9;
inline constexpr double kMetersPerDegLonEquator = 111'319.5;
// Points farther than this from the origin are rejected by project().
inline constexpr double kProjectionEnvelopeMeters = 100'000.0;

bool is_valid(const GeoPoint& p) noexcept;

// Throws GeoError if p is non-finite or out of range.
void validate(const GeoPoint& p);

/// Equirectangular projection tangent at a fixed origin.
///
/// Good to better than 0.1% over borough-scale extents, which is all the
/// matcher ever needs. Every module that measures distances on a network
/// uses the network's single projection so that all planar quantities share
/// one frame.
class LocalProjection {
 public:
  explicit LocalProjection(GeoPoint origin);

  const GeoPoint& origin() const noexcept { return origin_; }
  double meters_per_deg_lat() const noexcept { return meters_per_deg_lat_; }
  double meters_per_deg_lon() const noexcept { return meters_per_deg_lon_; }

  // Throws OutOfEnvelopeError beyond kProjectionEnvelopeMeters and GeoError
  // on invalid input.
  PlanarPoint project(const GeoPoint& p) const;
  // No envelope check; used on hot paths where p is known to be nearby.
  PlanarPoint project_unchecked(const GeoPoint& p) const noexcept;
  GeoPoint unproject(const PlanarPoint& p) const;

 private:
  GeoPoint origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

LocalProjection make_projection(const GeoPoint& origin);

double planar_distance(const PlanarPoint& a, const PlanarPoint& b) noexcept;

struct SegmentProjection {
  PlanarPoint closest;
  double t = 0.0;     // position along a->b, clamped to [0, 1]
  double dist = 0.0;  // meters from the query point to closest
};

// Degenerate segments (a == b) behave as the single point a with t = 0.
SegmentProjection point_segment_projection(const PlanarPoint& p, const PlanarPoint& a,
                                           const PlanarPoint& b) noexcept;

// Minimum distance from p to a polyline. Throws GeoError on an empty polyline.
double point_polyline_distance(const PlanarPoint& p, std::span<const PlanarPoint> polyline);

// Heading of a->b in degrees clockwise from north, in [0, 360).
// Throws GeoError when the points coincide.
double bearing(const PlanarPoint& a, const PlanarPoint& b);
// Geographic version: evaluated in an equirectangular frame centred between
// the two points.
double bearing(const GeoPoint& a, const GeoPoint& b);

// Smallest absolute difference between two headings, in [0, 180].
double angle_difference(double a_deg, double b_deg) noexcept;

// Wraps any finite angle into [0, 360).
double normalize_bearing(double deg) noexcept;

}  // namespace pfmm::geo
