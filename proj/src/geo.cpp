#include "pfmm/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pfmm/error.hpp"

namespace pfmm::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

void validate(const GeoPoint& p) {
  if (!is_valid(p)) {
    std::ostringstream os;
    os << "invalid coordinate (lat " << p.lat << ", lon " << p.lon << ")";
    throw GeoError(os.str());
  }
}

LocalProjection::LocalProjection(GeoPoint origin) : origin_(origin) {
  validate(origin);
  if (std::abs(origin.lat) >= 90.0) {
    throw GeoError("projection origin at a pole has no east-west scale");
  }
  meters_per_deg_lat_ = kMetersPerDegLat;
  meters_per_deg_lon_ = kMetersPerDegLonEquator * std::cos(origin.lat * kDegToRad);
}

PlanarPoint LocalProjection::project(const GeoPoint& p) const {
  validate(p);
  PlanarPoint q = project_unchecked(p);
  if (std::hypot(q.x, q.y) > kProjectionEnvelopeMeters) {
    std::ostringstream os;
    os << "point (" << p.lat << ", " << p.lon << ") lies outside the "
       << kProjectionEnvelopeMeters / 1000.0 << " km projection envelope around ("
       << origin_.lat << ", " << origin_.lon << ")";
    throw OutOfEnvelopeError(os.str());
  }
  return q;
}

PlanarPoint LocalProjection::project_unchecked(const GeoPoint& p) const noexcept {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_, (p.lat - origin_.lat) * meters_per_deg_lat_};
}

GeoPoint LocalProjection::unproject(const PlanarPoint& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw GeoError("cannot unproject a non-finite planar point");
  }
  return {origin_.lat + p.y / meters_per_deg_lat_, origin_.lon + p.x / meters_per_deg_lon_};
}

LocalProjection make_projection(const GeoPoint& origin) { return LocalProjection(origin); }

double planar_distance(const PlanarPoint& a, const PlanarPoint& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

SegmentProjection point_segment_projection(const PlanarPoint& p, const PlanarPoint& a,
                                           const PlanarPoint& b) noexcept {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  PlanarPoint closest{a.x + t * dx, a.y + t * dy};
  if (t == 1.0) closest = b;
  return {closest, t, planar_distance(p, closest)};
}

double point_polyline_distance(const PlanarPoint& p, std::span<const PlanarPoint> polyline) {
  if (polyline.empty()) throw GeoError("distance to an empty polyline is undefined");
  if (polyline.size() == 1) return planar_distance(p, polyline.front());
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, point_segment_projection(p, polyline[i], polyline[i + 1]).dist);
  }
  return best;
}

double bearing(const PlanarPoint& a, const PlanarPoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  if (dx == 0.0 && dy == 0.0) throw GeoError("bearing between coincident points is undefined");
  return normalize_bearing(std::atan2(dx, dy) * kRadToDeg);
}

double bearing(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  const double mid_lat = 0.5 * (a.lat + b.lat);
  const double kx = kMetersPerDegLonEquator * std::cos(mid_lat * kDegToRad);
  const PlanarPoint d{(b.lon - a.lon) * kx, (b.lat - a.lat) * kMetersPerDegLat};
  return bearing(PlanarPoint{0.0, 0.0}, d);
}

double angle_difference(double a_deg, double b_deg) noexcept {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

double normalize_bearing(double deg) noexcept {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative number can round up to exactly 360
  if (r >= 360.0) r = 0.0;
  return r;
}

}  // namespace pfmm::geo
