#include "core/experts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace burngail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// A driver is "settled" in its lane when this close to the lane center;
// MOBIL only fires from a settled state so decisions don't flip mid-maneuver.
constexpr double kSettledOffset = 0.3;
// Lane-change decisions are staggered across vehicles (one look every
// kMobilPeriod steps, phase by index) so two cars never swap lanes into each
// other within the same step.
constexpr int kMobilPeriod = 5;
// The new follower cannot react until a lane change is visibly under way, so
// its safety margin is judged on the gap it will have after this long.
constexpr double kCommitLookahead = 1.0;
// Fraction of the turn-rate budget the curve feedforward may consume; the
// remainder stays available to the lateral correction terms.
constexpr double kCurveTurnMargin = 0.9;
// Lateral slack beyond the lane center a vehicle may occupy mid-correction.
constexpr double kCurveLatSlack = 0.6;
// How far ahead experts look for upcoming curvature when planning braking.
constexpr double kCurveLookahead = 80.0;
constexpr double kCurveSampleStep = 5.0;
}  // namespace

const char* style_name(StyleClass c) {
  switch (c) {
    case StyleClass::Aggressive: return "aggressive";
    case StyleClass::Passive: return "passive";
    case StyleClass::Speeder: return "speeder";
    case StyleClass::Tailgater: return "tailgater";
  }
  return "unknown";
}

StyleTable StyleTable::defaults() {
  StyleTable t;
  auto& agg = t.entries[static_cast<int>(StyleClass::Aggressive)];
  agg.v0_mean = 18.0;
  agg.v0_std = 1.0;
  agg.base.max_accel = 3.0;
  agg.base.time_headway = 0.5;
  agg.base.min_gap = 1.0;

  auto& pas = t.entries[static_cast<int>(StyleClass::Passive)];
  pas.v0_mean = 10.0;
  pas.v0_std = 1.0;
  pas.base.max_accel = 1.5;
  pas.base.time_headway = 2.0;
  pas.base.min_gap = 4.0;

  auto& spd = t.entries[static_cast<int>(StyleClass::Speeder)];
  spd.v0_mean = 18.0;
  spd.v0_std = 1.0;
  spd.base.max_accel = 3.0;
  spd.base.time_headway = 2.0;
  spd.base.min_gap = 4.0;

  auto& tlg = t.entries[static_cast<int>(StyleClass::Tailgater)];
  tlg.v0_mean = 10.0;
  tlg.v0_std = 1.0;
  tlg.base.max_accel = 1.5;
  tlg.base.time_headway = 0.5;
  tlg.base.min_gap = 1.0;

  for (auto& e : t.entries) {
    e.base.desired_speed = e.v0_mean;
    e.base.comfort_decel = 2.0;
    e.base.accel_exponent = 4.0;
    e.base.politeness = 0.3;
    e.base.change_threshold = 0.2;
    e.base.safe_decel = 4.0;
  }
  return t;
}

StyleParams sample_style(const StyleTable& table, StyleClass cls, Rng& rng) {
  const StyleTemplate& tpl = table.entries[static_cast<int>(cls)];
  StyleParams p = tpl.base;
  double v0 = tpl.v0_mean + tpl.v0_std * rng.normal();
  double lo = tpl.v0_mean - 2.0 * tpl.v0_std;
  double hi = tpl.v0_mean + 2.0 * tpl.v0_std;
  v0 = std::clamp(v0, lo, hi);
  p.desired_speed = std::max(v0, 0.1);
  return p;
}

double idm_accel(const StyleParams& p, double v, double delta_v, double gap) {
  if (gap <= 0.0) return -p.safe_decel;
  double free_term = std::pow(std::max(v, 0.0) / p.desired_speed, p.accel_exponent);
  if (gap == kInf) return p.max_accel * (1.0 - free_term);
  double s_star = p.min_gap + v * p.time_headway +
                  v * delta_v / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  s_star = std::max(s_star, 0.0);  // backing off a fast-receding leader never helps
  double ratio = s_star / gap;
  return p.max_accel * (1.0 - free_term - ratio * ratio);
}

namespace {

// Signed gap from vehicle a to vehicle b ahead of it along the loop.
double forward_gap(const TrackGeometry& track, const VehicleState& a, const VehicleState& b) {
  double ds = wrap_s(track, b.s - a.s);
  return ds - 0.5 * (a.length + b.length);
}

struct Neighbor {
  int index = -1;
  double gap = kInf;
  double speed = 0.0;
};

Neighbor scan_lane(const TrackGeometry& track, const SceneState& scene, int index,
                   int lane, bool ahead) {
  const VehicleState& self = scene.vehicles[index];
  Neighbor best;
  double best_ds = kInf;
  for (int j = 0; j < static_cast<int>(scene.vehicles.size()); ++j) {
    if (j == index) continue;
    const VehicleState& other = scene.vehicles[j];
    if (nearest_lane(track, other.t) != lane) continue;
    double ds = wrap_s(track, ahead ? other.s - self.s : self.s - other.s);
    if (ds <= 0.0) ds += track.centerline_length;  // same-s: treat as full loop away
    if (ds < best_ds) {
      best_ds = ds;
      best.index = j;
      best.gap = ds - 0.5 * (self.length + other.length);
      best.speed = other.speed;
    }
  }
  return best;
}

}  // namespace

int find_leader_in_lane(const TrackGeometry& track, const SceneState& scene,
                        int index, int lane, double* gap_out) {
  Neighbor n = scan_lane(track, scene, index, lane, true);
  if (gap_out) *gap_out = n.gap;
  return n.index;
}

int find_follower_in_lane(const TrackGeometry& track, const SceneState& scene,
                          int index, int lane, double* gap_out) {
  Neighbor n = scan_lane(track, scene, index, lane, false);
  if (gap_out) *gap_out = n.gap;
  return n.index;
}

int find_leader_corridor(const TrackGeometry& track, const SceneState& scene,
                         int index, double target_t, double* gap_out,
                         std::span<const ExpertDriver> drivers) {
  const VehicleState& self = scene.vehicles[index];
  // Corridor spans the body at its current offset and at the target offset.
  double lo = std::min(self.t, target_t) - 0.5 * self.width;
  double hi = std::max(self.t, target_t) + 0.5 * self.width;
  int best = -1;
  double best_ds = kInf;
  for (int j = 0; j < static_cast<int>(scene.vehicles.size()); ++j) {
    if (j == index) continue;
    const VehicleState& other = scene.vehicles[j];
    // Turn-signal awareness: a committed lane changer occupies the band it is
    // sweeping toward its own target lane, not just its current body.
    double o_t_lo = other.t;
    double o_t_hi = other.t;
    if (!drivers.empty()) {
      double o_tgt = lane_center(track, drivers[j].target_lane);
      o_t_lo = std::min(o_t_lo, o_tgt);
      o_t_hi = std::max(o_t_hi, o_tgt);
    }
    double o_lo = o_t_lo - 0.5 * other.width;
    double o_hi = o_t_hi + 0.5 * other.width;
    if (o_hi < lo || o_lo > hi) continue;
    double ds = wrap_s(track, other.s - self.s);
    if (ds <= 0.0) ds += track.centerline_length;
    if (ds < best_ds) {
      best_ds = ds;
      best = j;
    }
  }
  if (best >= 0) {
    if (gap_out) *gap_out = best_ds - 0.5 * (self.length + scene.vehicles[best].length);
  } else if (gap_out) {
    *gap_out = kInf;
  }
  return best;
}

namespace {

// IDM acceleration vehicle `index` would have with the given leader.
double accel_with_leader(const SceneState& scene, int index, const StyleParams& p,
                         int leader, double gap) {
  const VehicleState& self = scene.vehicles[index];
  if (leader < 0) return idm_accel(p, self.speed, 0.0, kInf);
  return idm_accel(p, self.speed, self.speed - scene.vehicles[leader].speed, gap);
}

// IDM acceleration of `follower` if its leader were `leader` (or free road).
double follower_accel(const TrackGeometry& track, const SceneState& scene,
                      int follower, const StyleParams& fp, int leader) {
  const VehicleState& f = scene.vehicles[follower];
  if (leader < 0) return idm_accel(fp, f.speed, 0.0, kInf);
  double gap = forward_gap(track, f, scene.vehicles[leader]);
  return idm_accel(fp, f.speed, f.speed - scene.vehicles[leader].speed, gap);
}

}  // namespace

LaneChange mobil_decide(const TrackGeometry& track, const SceneState& scene,
                        int index, std::span<const ExpertDriver> drivers) {
  const VehicleState& self = scene.vehicles[index];
  const StyleParams& p = drivers[index].params;
  int lane = nearest_lane(track, self.t);

  double cur_gap;
  int cur_leader = find_leader_in_lane(track, scene, index, lane, &cur_gap);
  double a_self_now = accel_with_leader(scene, index, p, cur_leader, cur_gap);
  double cur_fgap;
  int cur_follower = find_follower_in_lane(track, scene, index, lane, &cur_fgap);

  // Old follower inherits our current leader whichever way we go.
  double old_term = 0.0;
  if (cur_follower >= 0) {
    const StyleParams& ofp = drivers[cur_follower].params;
    double a_of_now = follower_accel(track, scene, cur_follower, ofp, index);
    double a_of_after = follower_accel(track, scene, cur_follower, ofp, cur_leader);
    old_term = a_of_after - a_of_now;
  }

  double best_gain = p.change_threshold;
  LaneChange best = LaneChange::Stay;
  // Left (toward higher lane index) wins ties against Right.
  for (LaneChange cand : {LaneChange::Left, LaneChange::Right}) {
    int new_lane = lane + (cand == LaneChange::Left ? 1 : -1);
    if (new_lane < 0 || new_lane >= track.n_lanes) continue;

    double new_gap;
    int new_leader = find_leader_in_lane(track, scene, index, new_lane, &new_gap);
    double new_fgap;
    int new_follower = find_follower_in_lane(track, scene, index, new_lane, &new_fgap);
    (void)new_fgap;

    // Safety: never start a change into a slot already occupied by, or
    // closing onto, the new leader.
    if (new_leader >= 0) {
      double gap_pred = new_gap - std::max(self.speed - scene.vehicles[new_leader].speed, 0.0) *
                                      kCommitLookahead;
      if (new_gap <= 0.0 || gap_pred <= 0.0) continue;
    }

    double a_self_new = accel_with_leader(scene, index, p, new_leader, new_gap);
    double follower_term = 0.0;
    if (new_follower >= 0) {
      const StyleParams& nfp = drivers[new_follower].params;
      const VehicleState& nf = scene.vehicles[new_follower];
      // Safety: the vehicle behind in the target lane must never be forced
      // into braking at or beyond its safe_decel. It cannot react until the
      // maneuver is visible, so judge the gap it will have after the closing
      // speed has eaten into the margin for kCommitLookahead seconds.
      double gap_after = forward_gap(track, nf, self);
      double gap_pred = gap_after - std::max(nf.speed - self.speed, 0.0) * kCommitLookahead;
      double a_nf_after = idm_accel(nfp, nf.speed, nf.speed - self.speed, gap_pred);
      if (gap_after <= 0.0 || gap_pred <= 0.0 || a_nf_after <= -nfp.safe_decel) continue;
      double a_nf_now = follower_accel(track, scene, new_follower, nfp, new_leader);
      follower_term = a_nf_after - a_nf_now;
    }
    double gain = (a_self_new - a_self_now) + p.politeness * (follower_term + old_term);
    if (gain > best_gain) {
      best_gain = gain;
      best = cand;
    }
  }
  return best;
}

double curve_speed_limit(const TrackGeometry& track, const SimParams& sim,
                         int target_lane, double s) {
  double kappa = curvature_at(track, s);
  if (kappa <= 0.0) return kInf;
  // Holding the arc needs turn = kappa * v * cos(h) / (1 - kappa * t); budget
  // for the innermost offset the vehicle may reach around its lane.
  double t_inner = lane_center(track, target_lane) + kCurveLatSlack;
  double denom = std::max(1.0 - kappa * t_inner, kMinCurvatureDenom);
  return kCurveTurnMargin * sim.turn_max * denom / kappa;
}

double curve_accel_limit(const TrackGeometry& track, const SimParams& sim,
                         int target_lane, double s, double speed) {
  double limit = kInf;
  double v_here = curve_speed_limit(track, sim, target_lane, s);
  if (v_here < kInf) {
    // Track the local limit exactly: positive headroom below it, a hard
    // pull-down above it.
    limit = std::min(limit, (v_here - speed) / sim.dt);
  }
  for (double d = kCurveSampleStep; d <= kCurveLookahead; d += kCurveSampleStep) {
    double v_there = curve_speed_limit(track, sim, target_lane, wrap_s(track, s + d));
    if (v_there >= speed) continue;
    // Constant-deceleration profile reaching v_there after distance d.
    limit = std::min(limit, (v_there * v_there - speed * speed) / (2.0 * d));
  }
  return limit;
}

double steer_to_lane(const TrackGeometry& track, const SimParams& sim,
                     const SteerGains& gains, const VehicleState& v, double target_t) {
  double kappa = curvature_at(track, v.s);
  double denom = 1.0 - kappa * v.t;
  if (denom < kMinCurvatureDenom) denom = kMinCurvatureDenom;
  double cos_h = std::cos(v.heading_rel);
  // Feedforward holds heading_rel steady on the arc at the current offset.
  double turn_ff = kappa * v.speed * cos_h / denom;
  double err = target_t - v.t;
  double lat_rate = v.speed * std::sin(v.heading_rel);
  double v_eff = std::max(v.speed, 1.0);
  // Command a lateral approach rate, capped so the damping term can still
  // arrest it within the turn-rate budget left over the feedforward. Without
  // the cap, lane changes at cornering-limit speeds build up more lateral
  // rate than the saturated actuator can stop and overshoot off the road.
  double headroom_up = std::max(sim.turn_max - turn_ff, 0.05);
  double headroom_dn = std::max(turn_ff - sim.turn_min, 0.05);
  double desired_rate = (gains.kp / gains.kd) * err;
  desired_rate = std::clamp(desired_rate, -0.9 * headroom_up * v_eff / gains.kd,
                            0.9 * headroom_dn * v_eff / gains.kd);
  double turn = turn_ff + gains.kd * (desired_rate - lat_rate) / v_eff;
  return std::clamp(turn, sim.turn_min, sim.turn_max);
}

Action expert_action(const TrackGeometry& track, const SimParams& sim,
                     const SteerGains& gains, const SceneState& scene, int index,
                     std::span<ExpertDriver> drivers) {
  const VehicleState& self = scene.vehicles[index];
  ExpertDriver& drv = drivers[index];

  double target_t = lane_center(track, drv.target_lane);
  bool settled = std::abs(self.t - target_t) < kSettledOffset &&
                 (scene.time_index + index) % kMobilPeriod == 0;
  if (settled) {
    LaneChange lc = mobil_decide(track, scene, index, drivers);
    if (lc == LaneChange::Left && drv.target_lane + 1 < track.n_lanes) {
      drv.target_lane += 1;
    } else if (lc == LaneChange::Right && drv.target_lane > 0) {
      drv.target_lane -= 1;
    }
    target_t = lane_center(track, drv.target_lane);
  }

  double gap;
  int leader = find_leader_corridor(track, scene, index, target_t, &gap, drivers);
  double accel;
  if (leader < 0) {
    accel = idm_accel(drv.params, self.speed, 0.0, kInf);
  } else {
    accel = idm_accel(drv.params, self.speed,
                      self.speed - scene.vehicles[leader].speed, gap);
  }
  // Slow for curves: the steering clamp caps cornering speed, so brake ahead
  // of arcs instead of understeering across lanes inside them.
  accel = std::min(accel, curve_accel_limit(track, sim, drv.target_lane, self.s, self.speed));
  // Brake to a stop, never into reverse.
  accel = std::max(accel, -self.speed / sim.dt);
  accel = std::clamp(accel, sim.accel_min, sim.accel_max);

  double turn = steer_to_lane(track, sim, gains, self, target_t);
  return Action{accel, turn};
}

}  // namespace burngail
