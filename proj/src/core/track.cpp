#include "core/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace burngail {

namespace {
constexpr double kPi = std::numbers::pi;
}

TrackGeometry build_oval_track(double straight_length, double curve_radius,
                               int n_lanes, double lane_width) {
  if (straight_length < 0.0 || curve_radius <= 0.0 || n_lanes < 2 || lane_width <= 0.0) {
    throw ConfigError("build_oval_track: need straight_length >= 0, curve_radius > 0, "
                      "n_lanes >= 2, lane_width > 0");
  }
  TrackGeometry track;
  track.straight_length = straight_length;
  track.curve_radius = curve_radius;
  track.n_lanes = n_lanes;
  track.lane_width = lane_width;
  track.centerline_length = 2.0 * straight_length + 2.0 * kPi * curve_radius;
  return track;
}

double wrap_s(const TrackGeometry& track, double s) {
  double c = track.centerline_length;
  double w = std::fmod(s, c);
  if (w < 0.0) w += c;
  return w;
}

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

double curvature_at(const TrackGeometry& track, double s) {
  double L = track.straight_length;
  double R = track.curve_radius;
  double u = wrap_s(track, s);
  if (u < L) return 0.0;                      // straight 1
  if (u < L + kPi * R) return 1.0 / R;        // arc 1
  if (u < 2.0 * L + kPi * R) return 0.0;      // straight 2
  return 1.0 / R;                             // arc 2
}

GlobalPose curvilinear_to_global(const TrackGeometry& track, double s, double t) {
  double L = track.straight_length;
  double R = track.curve_radius;
  double u = wrap_s(track, s);

  double cx, cy, heading;
  if (u < L) {
    cx = u;
    cy = 0.0;
    heading = 0.0;
  } else if (u < L + kPi * R) {
    double phi = (u - L) / R;
    cx = L + R * std::cos(phi - kPi / 2.0);
    cy = R + R * std::sin(phi - kPi / 2.0);
    heading = phi;
  } else if (u < 2.0 * L + kPi * R) {
    double v = u - (L + kPi * R);
    cx = L - v;
    cy = 2.0 * R;
    heading = kPi;
  } else {
    double phi = (u - (2.0 * L + kPi * R)) / R;
    cx = R * std::cos(phi + kPi / 2.0);
    cy = R + R * std::sin(phi + kPi / 2.0);
    heading = kPi + phi;
  }

  GlobalPose pose;
  pose.x = cx - t * std::sin(heading);  // left normal = (-sin, cos)
  pose.y = cy + t * std::cos(heading);
  pose.heading = wrap_angle(heading);
  return pose;
}

namespace {

struct Candidate {
  bool valid = false;
  double s = 0.0;
  double t = 0.0;
};

// Projections onto the four segments; only in-extent projections are valid
// (the arcs own the seams).
Candidate project_straight1(const TrackGeometry& tr, double x, double y) {
  Candidate c;
  if (x < 0.0 || x > tr.straight_length) return c;
  c.valid = true;
  c.s = x;
  c.t = y;
  return c;
}

Candidate project_straight2(const TrackGeometry& tr, double x, double y) {
  Candidate c;
  if (x < 0.0 || x > tr.straight_length) return c;
  c.valid = true;
  c.s = tr.straight_length + kPi * tr.curve_radius + (tr.straight_length - x);
  c.t = 2.0 * tr.curve_radius - y;
  return c;
}

Candidate project_arc(const TrackGeometry& tr, double x, double y, bool first_arc) {
  const double R = tr.curve_radius;
  const double cx = first_arc ? tr.straight_length : 0.0;
  const double cy = R;
  double dx = x - cx;
  double dy = y - cy;
  double dist = std::hypot(dx, dy);
  Candidate c;
  if (dist < 1e-12) return c;  // at the arc center the projection is undefined
  double beta = std::atan2(dy, dx);
  double phi = first_arc ? beta + kPi / 2.0 : beta - kPi / 2.0;
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi > 2.0 * kPi) phi -= 2.0 * kPi;
  if (phi > kPi + 1e-12) return c;  // outside this arc's half-circle
  phi = std::min(phi, kPi);
  c.valid = true;
  c.s = first_arc ? tr.straight_length + phi * R
                  : 2.0 * tr.straight_length + kPi * R + phi * R;
  c.t = R - dist;
  return c;
}

}  // namespace

CurvilinearPos global_to_curvilinear(const TrackGeometry& track, double x, double y,
                                     double margin) {
  Candidate cands[4] = {
      project_straight1(track, x, y),
      project_arc(track, x, y, true),
      project_straight2(track, x, y),
      project_arc(track, x, y, false),
  };
  const Candidate* best = nullptr;
  for (const Candidate& c : cands) {
    if (!c.valid) continue;
    if (best == nullptr || std::abs(c.t) < std::abs(best->t)) best = &c;
  }
  if (best == nullptr) {
    throw RuntimeFault("global_to_curvilinear: no valid projection for point");
  }
  if (std::abs(best->t) > road_half_width(track) + margin) {
    throw RuntimeFault("global_to_curvilinear: point is beyond the projection margin");
  }
  CurvilinearPos out;
  out.s = wrap_s(track, best->s);
  out.t = best->t;
  return out;
}

double road_half_width(const TrackGeometry& track) {
  return 0.5 * track.n_lanes * track.lane_width;
}

double lane_center(const TrackGeometry& track, int lane) {
  return (lane - 0.5 * (track.n_lanes - 1)) * track.lane_width;
}

int nearest_lane(const TrackGeometry& track, double t) {
  int lane = static_cast<int>(std::lround(t / track.lane_width + 0.5 * (track.n_lanes - 1)));
  return std::clamp(lane, 0, track.n_lanes - 1);
}

}  // namespace burngail
