#include "core/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"

namespace burngail {

namespace {
constexpr double kTau = 6.283185307179586476925286766559;
}  // namespace

Action clamp_action(const SimParams& sim, const Action& a) {
  Action out;
  out.accel = std::clamp(a.accel, sim.accel_min, sim.accel_max);
  out.turn_rate = std::clamp(a.turn_rate, sim.turn_min, sim.turn_max);
  return out;
}

GlobalPose vehicle_global_pose(const TrackGeometry& track, const VehicleState& v) {
  GlobalPose pose = curvilinear_to_global(track, v.s, v.t);
  pose.heading = wrap_angle(pose.heading + v.heading_rel);
  return pose;
}

SceneState step_scene(const TrackGeometry& track, const SimParams& sim,
                      const SceneState& scene, const std::vector<Action>& actions) {
  if (actions.size() != scene.vehicles.size()) {
    throw RuntimeFault("step_scene: one action per vehicle required");
  }
  SceneState next = scene;
  next.time_index = scene.time_index + 1;
  for (size_t i = 0; i < scene.vehicles.size(); ++i) {
    if (!std::isfinite(actions[i].accel) || !std::isfinite(actions[i].turn_rate)) {
      throw RuntimeFault("step_scene: non-finite action for vehicle " + std::to_string(i));
    }
    const Action a = clamp_action(sim, actions[i]);
    const VehicleState& v = scene.vehicles[i];
    VehicleState& n = next.vehicles[i];

    double v_new = v.speed + a.accel * sim.dt;
    double v_mean = 0.5 * (v.speed + v_new);
    double kappa = curvature_at(track, v.s);
    double denom = std::max(1.0 - kappa * v.t, kMinCurvatureDenom);
    double ds = v_mean * std::cos(v.heading_rel) * sim.dt / denom;

    n.s = wrap_s(track, v.s + ds);
    n.t = v.t + v_mean * std::sin(v.heading_rel) * sim.dt;
    n.heading_rel = wrap_angle(v.heading_rel + a.turn_rate * sim.dt - kappa * ds);
    n.speed = v_new;
    n.prev_accel = a.accel;
    n.prev_turn = a.turn_rate;
  }
  return next;
}

std::array<std::array<double, 2>, 4> rect_corners(const GlobalPose& pose,
                                                  double length, double width) {
  double c = std::cos(pose.heading), s = std::sin(pose.heading);
  double hl = 0.5 * length, hw = 0.5 * width;
  std::array<std::array<double, 2>, 4> out;
  const double lx[4] = {hl, hl, -hl, -hl};
  const double ly[4] = {hw, -hw, -hw, hw};
  for (int k = 0; k < 4; ++k) {
    out[k][0] = pose.x + c * lx[k] - s * ly[k];
    out[k][1] = pose.y + s * lx[k] + c * ly[k];
  }
  return out;
}

namespace {

bool separated_on_axis(const std::array<std::array<double, 2>, 4>& a,
                       const std::array<std::array<double, 2>, 4>& b,
                       double ax, double ay) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (int k = 0; k < 4; ++k) {
    double pa = a[k][0] * ax + a[k][1] * ay;
    double pb = b[k][0] * ax + b[k][1] * ay;
    amin = std::min(amin, pa); amax = std::max(amax, pa);
    bmin = std::min(bmin, pb); bmax = std::max(bmax, pb);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool rects_overlap(const std::array<std::array<double, 2>, 4>& a,
                   const std::array<std::array<double, 2>, 4>& b) {
  // Two unique edge normals per rectangle.
  const std::array<std::array<double, 2>, 4>* rects[2] = {&a, &b};
  for (const auto* r : rects) {
    for (int e = 0; e < 2; ++e) {
      double ex = (*r)[e + 1][0] - (*r)[e][0];
      double ey = (*r)[e + 1][1] - (*r)[e][1];
      if (separated_on_axis(a, b, -ey, ex)) return false;
    }
  }
  return true;
}

LidarScan lidar_scan(const TrackGeometry& track, const SimParams& sim,
                     const SceneState& scene, int ego_index) {
  const int n = sim.lidar_beams;
  LidarScan scan;
  scan.dist.assign(n, sim.lidar_max_range);
  scan.rate.assign(n, 0.0);
  scan.hit.assign(n, -1);

  const VehicleState& ego = scene.vehicles[ego_index];
  GlobalPose ego_pose = vehicle_global_pose(track, ego);
  double ego_vx = ego.speed * std::cos(ego_pose.heading);
  double ego_vy = ego.speed * std::sin(ego_pose.heading);

  struct Target {
    double cx, cy, cos_h, sin_h, hl, hw, vx, vy;
    int index;
  };
  std::vector<Target> targets;
  targets.reserve(scene.vehicles.size());
  for (size_t j = 0; j < scene.vehicles.size(); ++j) {
    if (static_cast<int>(j) == ego_index) continue;
    const VehicleState& v = scene.vehicles[j];
    GlobalPose p = vehicle_global_pose(track, v);
    targets.push_back({p.x, p.y, std::cos(p.heading), std::sin(p.heading),
                       0.5 * v.length, 0.5 * v.width,
                       v.speed * std::cos(p.heading), v.speed * std::sin(p.heading),
                       static_cast<int>(j)});
  }

  for (int k = 0; k < n; ++k) {
    double ang = ego_pose.heading + kTau * k / n;
    double dx = std::cos(ang), dy = std::sin(ang);
    double best = sim.lidar_max_range;
    int best_idx = -1;
    for (const Target& tg : targets) {
      // Ray in the target's body frame; slab test against the half-extents.
      double ox = ego_pose.x - tg.cx, oy = ego_pose.y - tg.cy;
      double lox = tg.cos_h * ox + tg.sin_h * oy;
      double loy = -tg.sin_h * ox + tg.cos_h * oy;
      double ldx = tg.cos_h * dx + tg.sin_h * dy;
      double ldy = -tg.sin_h * dx + tg.cos_h * dy;

      double tmin = 0.0, tmax = best;
      bool miss = false;
      const double lo[2] = {lox, loy}, ld[2] = {ldx, ldy}, he[2] = {tg.hl, tg.hw};
      for (int axis = 0; axis < 2 && !miss; ++axis) {
        if (std::abs(ld[axis]) < 1e-12) {
          if (std::abs(lo[axis]) > he[axis]) miss = true;
        } else {
          double t1 = (-he[axis] - lo[axis]) / ld[axis];
          double t2 = (he[axis] - lo[axis]) / ld[axis];
          if (t1 > t2) std::swap(t1, t2);
          tmin = std::max(tmin, t1);
          tmax = std::min(tmax, t2);
          if (tmin > tmax) miss = true;
        }
      }
      if (!miss && tmin < best) {
        best = tmin;
        best_idx = tg.index;
      }
    }
    scan.dist[k] = best;
    if (best_idx >= 0) {
      const Target* tg = nullptr;
      for (const Target& t : targets) {
        if (t.index == best_idx) { tg = &t; break; }
      }
      scan.rate[k] = (tg->vx - ego_vx) * dx + (tg->vy - ego_vy) * dy;
      scan.hit[k] = best_idx;
    }
  }
  return scan;
}

EventFlags detect_events(const TrackGeometry& track, const SceneState& scene, int ego_index) {
  const VehicleState& ego = scene.vehicles[ego_index];
  EventFlags flags;
  flags.reversal = ego.speed < 0.0;
  flags.offroad = std::abs(ego.t) + 0.5 * ego.width > road_half_width(track);

  auto ego_rect = rect_corners(vehicle_global_pose(track, ego), ego.length, ego.width);
  for (size_t j = 0; j < scene.vehicles.size(); ++j) {
    if (static_cast<int>(j) == ego_index) continue;
    const VehicleState& v = scene.vehicles[j];
    auto other = rect_corners(vehicle_global_pose(track, v), v.length, v.width);
    if (rects_overlap(ego_rect, other)) {
      flags.collision = true;
      break;
    }
  }
  return flags;
}

Observation build_observation(const TrackGeometry& track, const SimParams& sim,
                              const ObsStandardization& std_cfg,
                              const SceneState& scene, int ego_index) {
  const VehicleState& ego = scene.vehicles[ego_index];
  LidarScan scan = lidar_scan(track, sim, scene, ego_index);
  EventFlags ev = detect_events(track, scene, ego_index);

  Observation obs;
  obs.reserve(observation_dim(sim));
  auto push = [&obs](double raw, const FeatureAffine& f) {
    obs.push_back((raw - f.shift) / f.scale);
  };

  for (double d : scan.dist) push(d, std_cfg.lidar_dist);
  for (double r : scan.rate) push(r, std_cfg.lidar_rate);

  double half = road_half_width(track);
  int lane = nearest_lane(track, ego.t);
  push(ego.speed, std_cfg.speed);
  push(ego.t - lane_center(track, lane), std_cfg.lane_offset);
  push(ego.heading_rel, std_cfg.rel_heading);
  push(curvature_at(track, ego.s), std_cfg.curvature);
  push(half - ego.t, std_cfg.marking_left);
  push(ego.t + half, std_cfg.marking_right);
  push(ego.prev_accel, std_cfg.prev_accel);
  push(ego.prev_turn, std_cfg.prev_turn);

  obs.push_back(ev.collision ? 1.0 : 0.0);
  obs.push_back(ev.offroad ? 1.0 : 0.0);
  obs.push_back(ev.reversal ? 1.0 : 0.0);
  return obs;
}

}  // namespace burngail
