#pragma once

#include <array>
#include <span>
#include <string>

#include "core/rng.hpp"
#include "core/scene.hpp"
#include "core/track.hpp"

namespace burngail {

enum class StyleClass : int { Aggressive = 0, Passive = 1, Speeder = 2, Tailgater = 3 };
constexpr int kNumStyles = 4;

const char* style_name(StyleClass c);

// Car-following and lane-change parameters for one driver.
struct StyleParams {
  double desired_speed = 15.0;     // v0, m/s
  double max_accel = 2.0;          // m/s^2
  double comfort_decel = 2.0;      // b, m/s^2
  double min_gap = 2.0;            // s0, m
  double time_headway = 1.5;       // s
  double accel_exponent = 4.0;     // delta
  double politeness = 0.3;         // MOBIL p, in [0, 1]
  double change_threshold = 0.2;   // MOBIL delta-a threshold, m/s^2
  double safe_decel = 4.0;         // MOBIL b_safe, m/s^2
};

// Per-class template: desired speed is drawn per driver, the rest is shared
// by everyone in the class.
struct StyleTemplate {
  double v0_mean = 15.0;
  double v0_std = 1.0;
  StyleParams base;
};

struct StyleTable {
  std::array<StyleTemplate, kNumStyles> entries;
  static StyleTable defaults();
};

// Template for `cls` with v0 ~ Normal(mean, std), truncated at two standard
// deviations and kept positive.
StyleParams sample_style(const StyleTable& table, StyleClass cls, Rng& rng);

// Car-following acceleration. delta_v is the closing speed (own speed minus
// leader speed); gap is bumper-to-bumper, +inf for a free road. gap <= 0 is
// treated as an emergency and returns -safe_decel.
double idm_accel(const StyleParams& p, double v, double delta_v, double gap);

enum class LaneChange { Left, Stay, Right };

struct SteerGains {
  double kp = 3.0;
  double kd = 3.5;
};

// PD lane-keeping with curvature feedforward. Output is within the turn-rate
// clamps of `sim`.
double steer_to_lane(const TrackGeometry& track, const SimParams& sim,
                     const SteerGains& gains, const VehicleState& v, double target_t);

// Mutable controller state for one expert-driven vehicle.
struct ExpertDriver {
  StyleParams params;
  int target_lane = 0;
  StyleClass style = StyleClass::Passive;
};

// Longitudinal neighbor in a given lane (by nearest lane center). Returns the
// vehicle index or -1, with the bumper-to-bumper gap in *gap_out.
int find_leader_in_lane(const TrackGeometry& track, const SceneState& scene,
                        int index, int lane, double* gap_out);
int find_follower_in_lane(const TrackGeometry& track, const SceneState& scene,
                          int index, int lane, double* gap_out);

// Nearest vehicle ahead whose swept lateral band overlaps the corridor swept
// by vehicle `index` while tracking `target_t`. This is what the acceleration
// controller reacts to, so cut-ins are seen as soon as a change is committed.
// When `drivers` is non-empty, other vehicles occupy the band between their
// current offset and their own target lane center (turn-signal awareness);
// otherwise just their current body.
int find_leader_corridor(const TrackGeometry& track, const SceneState& scene,
                         int index, double target_t, double* gap_out,
                         std::span<const ExpertDriver> drivers = {});

// Highest speed at which the turn-rate clamp can still hold the curve at `s`
// for a vehicle tracking `target_lane`, with headroom left for lateral
// corrections. Unbounded (+inf) on straights.
double curve_speed_limit(const TrackGeometry& track, const SimParams& sim,
                         int target_lane, double s);

// Acceleration ceiling so the vehicle respects curve_speed_limit now and can
// brake down to it before reaching any curve within the lookahead window.
double curve_accel_limit(const TrackGeometry& track, const SimParams& sim,
                         int target_lane, double s, double speed);

// Lane-change decision: picks the candidate lane whose acceleration incentive
// (own gain plus politeness-weighted effect on old and new followers) exceeds
// the threshold, subject to the new follower never needing more than
// safe_decel of braking. Ties break toward Stay, then Left.
LaneChange mobil_decide(const TrackGeometry& track, const SceneState& scene,
                        int index, std::span<const ExpertDriver> drivers);

// Full expert step for one vehicle: MOBIL (only when settled in the current
// target lane), IDM toward the corridor leader, steering toward the target
// lane center. Updates drivers[index].target_lane in place.
Action expert_action(const TrackGeometry& track, const SimParams& sim,
                     const SteerGains& gains, const SceneState& scene, int index,
                     std::span<ExpertDriver> drivers);

}  // namespace burngail
