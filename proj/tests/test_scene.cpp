#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/scene.hpp"
#include "core/track.hpp"

using namespace burngail;

namespace {
constexpr double kPi = 3.14159265358979323846;

TrackGeometry default_track() { return build_oval_track(100.0, 30.0, 2, 3.0); }

VehicleState make_vehicle(double s, double t, double h, double v) {
  VehicleState out;
  out.s = s;
  out.t = t;
  out.heading_rel = h;
  out.speed = v;
  return out;
}

SceneState single(double s, double t, double h, double v) {
  SceneState scene;
  scene.vehicles.push_back(make_vehicle(s, t, h, v));
  return scene;
}
}  // namespace

TEST_CASE("step_scene straight-line kinematics") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene = single(10.0, 0.0, 0.0, 10.0);

  SceneState next = step_scene(trk, sim, scene, {{2.0, 0.0}});
  CHECK(next.time_index == 1);
  CHECK(next.vehicles[0].speed == doctest::Approx(10.2));
  // trapezoidal: ds = mean(10.0, 10.2) * 0.1
  CHECK(next.vehicles[0].s == doctest::Approx(11.01));
  CHECK(next.vehicles[0].t == doctest::Approx(0.0));
  CHECK(next.vehicles[0].heading_rel == doctest::Approx(0.0));
  CHECK(next.vehicles[0].prev_accel == doctest::Approx(2.0));
  CHECK(next.vehicles[0].prev_turn == doctest::Approx(0.0));
}

TEST_CASE("step_scene clamps actions to simulator bounds") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene = single(10.0, 0.0, 0.0, 10.0);
  SceneState next = step_scene(trk, sim, scene, {{100.0, -100.0}});
  CHECK(next.vehicles[0].speed == doctest::Approx(10.0 + sim.accel_max * sim.dt));
  CHECK(next.vehicles[0].prev_accel == doctest::Approx(sim.accel_max));
  CHECK(next.vehicles[0].prev_turn == doctest::Approx(sim.turn_min));
}

TEST_CASE("realized global heading change equals turn*dt") {
  TrackGeometry trk = default_track();
  SimParams sim;
  // Interior of arc 1, off-center, heading misaligned: the hard case.
  SceneState scene = single(150.0, 1.2, 0.15, 12.0);
  GlobalPose before = vehicle_global_pose(trk, scene.vehicles[0]);
  double turn = 0.3;
  SceneState next = step_scene(trk, sim, scene, {{0.0, turn}});
  GlobalPose after = vehicle_global_pose(trk, next.vehicles[0]);
  double dh = wrap_angle(after.heading - before.heading);
  CHECK(dh == doctest::Approx(turn * sim.dt).epsilon(1e-10));
}

TEST_CASE("curvature denominator is clamped near the arc center") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene = single(150.0, 27.0, 0.0, 10.0);  // 1 - t/R = 0.1 -> clamped to 0.2
  SceneState next = step_scene(trk, sim, scene, {{0.0, 0.0}});
  double ds = next.vehicles[0].s - scene.vehicles[0].s;
  CHECK(ds == doctest::Approx(10.0 * 0.1 / 0.2));
}

TEST_CASE("step_scene faults") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene = single(10.0, 0.0, 0.0, 10.0);
  CHECK_THROWS_AS(step_scene(trk, sim, scene, {}), RuntimeFault);
  double nan = std::nan("");
  CHECK_THROWS_WITH_AS(step_scene(trk, sim, scene, {{nan, 0.0}}),
                       doctest::Contains("vehicle 0"), RuntimeFault);
}

TEST_CASE("lidar forward beam distance and range rate") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene;
  scene.vehicles.push_back(make_vehicle(20.0, 0.0, 0.0, 10.0));  // ego
  scene.vehicles.push_back(make_vehicle(30.0, 0.0, 0.0, 5.0));   // 10 m ahead, slower
  LidarScan scan = lidar_scan(trk, sim, scene, 0);

  // Ray starts at the ego center; near face of the target is at 10 - 4.5/2.
  CHECK(scan.dist[0] == doctest::Approx(7.75));
  CHECK(scan.rate[0] == doctest::Approx(-5.0));
  CHECK(scan.hit[0] == 1);

  // Rear beam sees nothing.
  int n = sim.lidar_beams;
  CHECK(scan.dist[n / 2] == doctest::Approx(sim.lidar_max_range));
  CHECK(scan.rate[n / 2] == 0.0);
  CHECK(scan.hit[n / 2] == -1);
}

TEST_CASE("lidar lateral beam hits the side face") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene;
  scene.vehicles.push_back(make_vehicle(20.0, 0.0, 0.0, 10.0));
  scene.vehicles.push_back(make_vehicle(20.0, 3.0, 0.0, 14.0));  // directly left
  LidarScan scan = lidar_scan(trk, sim, scene, 0);
  // 360/20 = 18 deg per beam; beam 5 points 90 deg CCW (straight left).
  CHECK(scan.dist[5] == doctest::Approx(3.0 - 0.9));
  // Purely tangential relative motion has zero range rate.
  CHECK(scan.rate[5] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lidar mirror symmetry") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState left;
  left.vehicles.push_back(make_vehicle(20.0, 0.0, 0.0, 10.0));
  left.vehicles.push_back(make_vehicle(28.0, 2.0, 0.0, 10.0));
  SceneState right = left;
  right.vehicles[1].t = -2.0;

  LidarScan a = lidar_scan(trk, sim, left, 0);
  LidarScan b = lidar_scan(trk, sim, right, 0);
  int n = sim.lidar_beams;
  for (int k = 0; k < n; ++k) {
    CHECK(a.dist[k] == doctest::Approx(b.dist[(n - k) % n]).epsilon(1e-12));
  }
}

TEST_CASE("lidar removal restores max range") {
  TrackGeometry trk = default_track();
  SimParams sim;
  SceneState scene;
  scene.vehicles.push_back(make_vehicle(20.0, 0.0, 0.0, 10.0));
  scene.vehicles.push_back(make_vehicle(30.0, 0.0, 0.0, 5.0));
  LidarScan with = lidar_scan(trk, sim, scene, 0);
  REQUIRE(with.hit[0] == 1);

  SceneState alone;
  alone.vehicles.push_back(scene.vehicles[0]);
  LidarScan without = lidar_scan(trk, sim, alone, 0);
  CHECK(without.dist[0] == doctest::Approx(sim.lidar_max_range));
  for (int k = 0; k < sim.lidar_beams; ++k) CHECK(without.hit[k] == -1);
}

TEST_CASE("event detection") {
  TrackGeometry trk = default_track();

  SceneState scene = single(10.0, 2.2, 0.0, 10.0);
  EventFlags ev = detect_events(trk, scene, 0);
  CHECK(ev.offroad);  // |2.2| + 0.9 > 3.0
  CHECK_FALSE(ev.collision);
  CHECK_FALSE(ev.reversal);

  scene.vehicles[0].t = 2.0;  // 2.9 < 3.0
  CHECK_FALSE(detect_events(trk, scene, 0).offroad);

  scene.vehicles[0].speed = -0.01;
  CHECK(detect_events(trk, scene, 0).reversal);
  scene.vehicles[0].speed = 0.0;
  CHECK_FALSE(detect_events(trk, scene, 0).reversal);

  SceneState pair;
  pair.vehicles.push_back(make_vehicle(20.0, 0.0, 0.0, 10.0));
  pair.vehicles.push_back(make_vehicle(24.0, 0.0, 0.0, 10.0));  // 4 < 4.5 apart
  CHECK(detect_events(trk, pair, 0).collision);
  CHECK(detect_events(trk, pair, 1).collision);
  pair.vehicles[1].s = 25.0;
  CHECK_FALSE(detect_events(trk, pair, 0).collision);
}

TEST_CASE("observation layout and standardization") {
  TrackGeometry trk = default_track();
  SimParams sim;
  ObsStandardization std_cfg;
  SceneState scene = single(10.0, -1.5, 0.0, 10.0);

  Observation obs = build_observation(trk, sim, std_cfg, scene, 0);
  REQUIRE(static_cast<int>(obs.size()) == observation_dim(sim));
  REQUIRE(obs.size() == 51);

  int n = sim.lidar_beams;
  for (int k = 0; k < n; ++k) {
    CHECK(obs[k] == doctest::Approx(1.0));       // max range -> (100-50)/50
    CHECK(obs[n + k] == doctest::Approx(0.0));   // no rate
  }
  int r = 2 * n;
  CHECK(obs[r + 0] == doctest::Approx(0.0));   // speed 10 standardized
  CHECK(obs[r + 1] == doctest::Approx(0.0));   // centered in lane 0
  CHECK(obs[r + 2] == doctest::Approx(0.0));   // aligned
  CHECK(obs[r + 3] == doctest::Approx(0.0));   // straight segment
  CHECK(obs[r + 4] == doctest::Approx(0.5));   // left edge 4.5 m -> (4.5-3)/3
  CHECK(obs[r + 5] == doctest::Approx(-0.5));  // right edge 1.5 m -> (1.5-3)/3
  CHECK(obs[r + 6] == doctest::Approx(0.0));
  CHECK(obs[r + 7] == doctest::Approx(0.0));
  CHECK(obs[r + 8] == 0.0);
  CHECK(obs[r + 9] == 0.0);
  CHECK(obs[r + 10] == 0.0);

  // Indicators pass through unstandardized.
  scene.vehicles[0].speed = -1.0;
  Observation rev = build_observation(trk, sim, std_cfg, scene, 0);
  CHECK(rev[r + 10] == 1.0);
}
