#pragma once

namespace burngail {

// Closed oval track: two straights of length `straight_length` joined by two
// semicircular arcs of radius `curve_radius`, traversed counterclockwise.
//
// Curvilinear frame: s is arc length along the centerline, wrapped to
// [0, centerline_length); t is the signed lateral offset, positive to the
// left of the direction of travel (toward the inside of the oval).
//
// Global layout: straight 1 runs from (0,0) to (straight_length,0) heading +x;
// arc 1 curves left around (straight_length, curve_radius); straight 2 runs
// back along y = 2*curve_radius heading -x; arc 2 closes the loop around
// (0, curve_radius). s = 0, t = 0 is the global origin with heading 0.
struct TrackGeometry {
  double straight_length = 0.0;
  double curve_radius = 0.0;
  int n_lanes = 0;
  double lane_width = 0.0;
  double centerline_length = 0.0;  // derived: 2*straight + 2*pi*radius
};

struct GlobalPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // tangent heading at (s); radians, wrapped to (-pi, pi]
};

struct CurvilinearPos {
  double s = 0.0;
  double t = 0.0;
};

// straight_length may be zero (degenerate oval = circle); everything else
// must be positive and n_lanes >= 2.
TrackGeometry build_oval_track(double straight_length, double curve_radius,
                               int n_lanes, double lane_width);

double wrap_s(const TrackGeometry& track, double s);

// Signed curvature of the centerline at s: 0 on straights, 1/radius on arcs
// (left turns are positive).
double curvature_at(const TrackGeometry& track, double s);

GlobalPose curvilinear_to_global(const TrackGeometry& track, double s, double t);

// Inverse projection. Throws RuntimeFault when the point lies further than
// `margin` beyond the road edge, where the projection stops being reliable.
CurvilinearPos global_to_curvilinear(const TrackGeometry& track, double x, double y,
                                     double margin = 6.0);

double road_half_width(const TrackGeometry& track);

// Lane 0 is the rightmost (outermost) lane; lane centers are spaced
// lane_width apart and symmetric about the centerline.
double lane_center(const TrackGeometry& track, int lane);
int nearest_lane(const TrackGeometry& track, double t);

double wrap_angle(double a);  // to (-pi, pi]

}  // namespace burngail
