#pragma once

// Holland parametric wind field evaluated on a planar km grid.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stormdn/error.hpp"

namespace stormdn {

struct Point {
  double x = 0.0;  // km
  double y = 0.0;  // km
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Waypoint {
  double t_h = 0.0;
  Point center;
};

struct StormTrack {
  std::vector<Waypoint> waypoints;
  double vm_mps = 0.0;  // maximum intensity
  double rm_km = 0.0;   // radius of maximum winds
  double b = 0.0;       // shape parameter
  double t1 = 0.0;      // arrival hour
  double t2 = 0.0;      // departure hour

  void validate() const {
    std::vector<std::string> bad;
    if (waypoints.size() < 2) bad.push_back("track needs at least 2 waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (!(waypoints[i].t_h > waypoints[i - 1].t_h)) {
        bad.push_back("waypoint times must be strictly increasing (index " +
                      std::to_string(i) + ")");
      }
    }
    if (!(vm_mps > 0)) bad.push_back("vm must be > 0");
    if (!(rm_km > 0)) bad.push_back("rm must be > 0");
    if (!(b > 0)) bad.push_back("b must be > 0");
    if (!(t2 > t1)) bad.push_back("t2 must be > t1");
    if (waypoints.size() >= 2 &&
        (waypoints.front().t_h > t1 || waypoints.back().t_h < t2)) {
      bad.push_back("waypoints must cover [t1, t2]");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

struct GridCell {
  int h = 0;
  Point center;
  double side = 1.0;  // km
};

struct WindSample {
  int cell = 0;
  double t = 0.0;
  double v = 0.0;  // m/s
  double r = 0.0;  // km
};

// Distances below this are clamped before evaluating the Holland profile.
inline constexpr double kMinStormDistanceKm = 0.1;
// Wind and failure rates are sampled hourly.
inline constexpr double kTimeStepHours = 1.0;

// Piecewise-linear interpolation of the storm center between waypoints.
inline Point storm_center_at(const StormTrack& track, double t) {
  const auto& wp = track.waypoints;
  if (wp.empty() || t < wp.front().t_h || t > wp.back().t_h) {
    throw OutOfRange("time " + std::to_string(t) + " h outside the storm track span");
  }
  auto it = std::upper_bound(wp.begin(), wp.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t_h; });
  if (it == wp.end()) return wp.back().center;
  const Waypoint& hi = *it;
  const Waypoint& lo = *(it - 1);
  const double w = (t - lo.t_h) / (hi.t_h - lo.t_h);
  return {lo.center.x + w * (hi.center.x - lo.center.x),
          lo.center.y + w * (hi.center.y - lo.center.y)};
}

// v = Vm (Rm/r)^(B/2) exp(1 - (Rm/r)^B)^(1/2)
inline double holland_velocity(const StormTrack& track, double r_km) {
  if (!(r_km > 0)) throw SingularInput("Holland profile is singular at r <= 0");
  const double ratio = track.rm_km / r_km;
  const double scaled = std::pow(ratio, track.b);
  return track.vm_mps * std::pow(ratio, track.b / 2.0) *
         std::sqrt(std::exp(1.0 - scaled));
}

inline std::vector<WindSample> wind_field_at(const StormTrack& track,
                                             std::span<const GridCell> grid, double t,
                                             double clamp_km = kMinStormDistanceKm) {
  const Point eye = storm_center_at(track, t);
  std::vector<WindSample> out;
  out.reserve(grid.size());
  for (const auto& cell : grid) {
    const double r = distance(cell.center, eye);
    out.push_back({cell.h, t, holland_velocity(track, std::max(r, clamp_km)), r});
  }
  return out;
}

// Hourly sample times t1, t1+1, ..., strictly below t2. Each sample stands for
// the hour that starts at it, so a 24 h window yields 24 samples.
inline std::vector<double> storm_hours(const StormTrack& track) {
  std::vector<double> hours;
  for (double t = track.t1; t < track.t2 - 1e-9; t += kTimeStepHours) hours.push_back(t);
  return hours;
}

}  // namespace stormdn
