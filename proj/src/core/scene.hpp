#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/track.hpp"

namespace burngail {

struct Action {
  double accel = 0.0;      // m/s^2
  double turn_rate = 0.0;  // rad/s
};

constexpr int kNoStyle = -1;  // style_class value for a learned ego

struct VehicleState {
  double s = 0.0;            // m along centerline, in [0, centerline_length)
  double t = 0.0;            // m lateral offset, positive left
  double heading_rel = 0.0;  // rad relative to the local track tangent
  double speed = 0.0;        // m/s, signed (negative = reversing)
  double length = 4.5;       // m
  double width = 1.8;        // m
  int style_class = kNoStyle;
  // Realized (clamped) action applied on the previous step; feeds the
  // observation's previous-acceleration / previous-turn-rate features.
  double prev_accel = 0.0;
  double prev_turn = 0.0;
};

struct SceneState {
  int64_t time_index = 0;  // steps of 0.1 s
  std::vector<VehicleState> vehicles;
  int ego_index = 0;
};

struct SimParams {
  double dt = 0.1;
  int lidar_beams = 20;
  double lidar_max_range = 100.0;
  double accel_min = -4.0;
  double accel_max = 4.0;
  double turn_min = -0.5;
  double turn_max = 0.5;
};

// Affine standardization constants per feature group: out = (raw - shift) / scale.
// Fixed by configuration, never fit from data. Indicators are passed through.
struct FeatureAffine {
  double shift = 0.0;
  double scale = 1.0;
};

struct ObsStandardization {
  FeatureAffine lidar_dist{50.0, 50.0};
  FeatureAffine lidar_rate{0.0, 10.0};
  FeatureAffine speed{10.0, 10.0};
  FeatureAffine lane_offset{0.0, 3.0};
  FeatureAffine rel_heading{0.0, 0.5};
  FeatureAffine curvature{0.0, 1.0 / 30.0};
  FeatureAffine marking_left{3.0, 3.0};
  FeatureAffine marking_right{3.0, 3.0};
  FeatureAffine prev_accel{0.0, 4.0};
  FeatureAffine prev_turn{0.0, 0.5};
};

using Observation = std::vector<double>;

// Curvilinear kinematics have a singularity where 1 - curvature*t hits zero
// (the arc center). The factor is clamped so far-offroad vehicles keep
// integrating finitely instead of blowing up.
constexpr double kMinCurvatureDenom = 0.2;

constexpr int kRoadFeatureDim = 8;
constexpr int kIndicatorDim = 3;

inline int observation_dim(const SimParams& sim) {
  return 2 * sim.lidar_beams + kRoadFeatureDim + kIndicatorDim;
}

Action clamp_action(const SimParams& sim, const Action& a);

GlobalPose vehicle_global_pose(const TrackGeometry& track, const VehicleState& v);

// Advances every vehicle by one step of curvilinear unicycle kinematics.
// Pure function of its inputs; throws RuntimeFault on a non-finite action.
SceneState step_scene(const TrackGeometry& track, const SimParams& sim,
                      const SceneState& scene, const std::vector<Action>& actions);

struct LidarScan {
  std::vector<double> dist;   // m, in [0, max_range]
  std::vector<double> rate;   // m/s, relative closing speed along the beam (negative = closing)
  std::vector<int> hit;       // vehicle index hit by the beam, -1 when none
};

// Beams spread uniformly over 360 degrees in the ego frame, beam 0 along the
// ego heading, proceeding counterclockwise. Rays start at the ego center.
LidarScan lidar_scan(const TrackGeometry& track, const SimParams& sim,
                     const SceneState& scene, int ego_index);

struct EventFlags {
  bool collision = false;  // ego rectangle overlaps any other vehicle
  bool offroad = false;    // ego body crosses the outer road edge
  bool reversal = false;   // ego speed < 0
};

EventFlags detect_events(const TrackGeometry& track, const SceneState& scene, int ego_index);

// The 51-dim feature vector (with 20 beams):
//   [lidar_dist(20) | lidar_rate(20) | road(8) | indicators(3)]
// road = (speed, lane offset, relative heading, curvature, distance to left
// road edge, distance to right road edge, previous accel, previous turn rate).
// All but the indicators are standardized with the configured constants.
Observation build_observation(const TrackGeometry& track, const SimParams& sim,
                              const ObsStandardization& std_cfg,
                              const SceneState& scene, int ego_index);

// Oriented-rectangle overlap via the separating axis test.
std::array<std::array<double, 2>, 4> rect_corners(const GlobalPose& pose,
                                                  double length, double width);
bool rects_overlap(const std::array<std::array<double, 2>, 4>& a,
                   const std::array<std::array<double, 2>, 4>& b);

}  // namespace burngail
