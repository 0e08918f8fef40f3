#include "pfmm/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pfmm/error.hpp"

namespace pfmm::trajectory {

void validate(const GpsPoint& p) {
  geo::validate(p.position);
  if (!std::isfinite(p.bearing) || p.bearing < 0.0 || p.bearing >= 360.0) {
    throw Error("bearing " + std::to_string(p.bearing) + " outside [0, 360)");
  }
  if (!std::isfinite(p.timestamp)) throw Error("non-finite timestamp");
}

Trajectory::Trajectory(std::vector<GpsPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error("a trajectory needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    validate(points_[i]);
    if (i > 0 && !(points_[i].timestamp > points_[i - 1].timestamp)) {
      throw Error("timestamps must be strictly increasing (point " + std::to_string(i) + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::string_view kHeader = "timestamp,lat,lon,bearing";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(out);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

Trajectory parse_trajectory(std::string_view text) {
  std::vector<GpsPoint> points;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
      if (line != kHeader) fail(line_no, "expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    double fields[4];
    std::size_t count = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      if (count == 4) fail(line_no, "too many fields (expected 4)");
      if (!parse_double(field, fields[count])) {
        fail(line_no, "cannot parse field " + std::to_string(count + 1) + " '" + std::string(trim(field)) + "'");
      }
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != 4) fail(line_no, "expected 4 fields, found " + std::to_string(count));

    GpsPoint p{{fields[1], fields[2]}, fields[3], fields[0]};
    if (!geo::is_valid(p.position)) fail(line_no, "latitude/longitude out of range");
    if (p.bearing < 0.0 || p.bearing >= 360.0) fail(line_no, "bearing outside [0, 360)");
    if (!points.empty() && !(p.timestamp > points.back().timestamp)) {
      std::ostringstream os;
      os << "timestamp " << p.timestamp << " is not after timestamp " << points.back().timestamp << " on line "
         << lines.back();
      fail(line_no, os.str());
    }
    points.push_back(p);
    lines.push_back(line_no);
  }
  if (!header_seen) throw ParseError("line 1: missing header '" + std::string(kHeader) + "'");
  if (points.size() < 2) throw ParseError("trajectory has " + std::to_string(points.size()) + " points, need at least 2");
  return Trajectory(std::move(points));
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trajectory file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trajectory(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_trajectory(const Trajectory& traj) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& p : traj.points()) {
    append_number(out, p.timestamp);
    out += ',';
    append_number(out, p.position.lat);
    out += ',';
    append_number(out, p.position.lon);
    out += ',';
    append_number(out, p.bearing);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Degradation

Trajectory perturb(const Trajectory& traj, double sigma, Rng& rng) {
  return perturb(traj, sigma, geo::make_projection(traj.front().position), rng);
}

Trajectory perturb(const Trajectory& traj, double sigma, const geo::LocalProjection& frame, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("perturbation sigma must be >= 0");
  if (sigma == 0.0) return traj;
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<GpsPoint> out = traj.points();
  for (auto& p : out) {
    geo::PlanarPoint q = frame.project_unchecked(p.position);
    q.x += noise(rng);
    q.y += noise(rng);
    p.position = frame.unproject(q);
  }
  return Trajectory(std::move(out));
}

Trajectory downsample(const Trajectory& traj, double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) throw Error("downsampling interval must be > 0");
  const auto& pts = traj.points();
  std::vector<GpsPoint> kept{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].timestamp - kept.back().timestamp >= interval || i + 1 == pts.size()) kept.push_back(pts[i]);
  }
  if (kept.size() < 2) throw Error("downsampling left fewer than 2 points");
  return Trajectory(std::move(kept));
}

std::size_t holdout_count(std::size_t n, double fraction) noexcept {
  // The epsilon absorbs products like 0.1 * 30 landing just under an integer.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

HoldoutSplit split_holdout(const Trajectory& traj, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 0.5)) throw Error("holdout fraction must be in (0, 0.5)");
  const std::size_t n = traj.size();
  const std::size_t k = holdout_count(n, fraction);
  if (n - k < 2) throw Error("trajectory of " + std::to_string(n) + " points is too short to split");

  std::vector<std::size_t> candidates(n - 1);
  std::iota(candidates.begin(), candidates.end(), std::size_t{1});
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(chosen), k, rng);
  std::sort(chosen.begin(), chosen.end());

  std::vector<GpsPoint> train;
  std::vector<HeldOutPoint> test;
  train.reserve(n - k);
  test.reserve(k);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < chosen.size() && chosen[next] == i) {
      test.push_back({i, traj[i]});
      ++next;
    } else {
      train.push_back(traj[i]);
    }
  }
  return {Trajectory(std::move(train)), std::move(test)};
}

}  // namespace pfmm::trajectory
