#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/types.hpp"

namespace junction {

enum class TurnDirection { Right, Left };

struct PathPose {
  Vec2 position;
  double heading = 0.0;
};

// Polyline route parameterized by arclength. Waypoints are densely spaced
// (about one meter apart) so linear interpolation is adequate.
class PathSpec {
 public:
  PathSpec() = default;

  static PathSpec from_waypoints(std::vector<Vec2> pts) {
    PathSpec p;
    for (const Vec2& w : pts) {
      if (!p.pts_.empty() && (w - p.pts_.back()).norm() < 1e-12) {
        continue;
      }
      p.pts_.push_back(w);
    }
    if (p.pts_.size() < 2) {
      throw std::invalid_argument("PathSpec: need at least two distinct waypoints");
    }
    p.cum_.resize(p.pts_.size());
    p.cum_[0] = 0.0;
    for (std::size_t i = 1; i < p.pts_.size(); ++i) {
      p.cum_[i] = p.cum_[i - 1] + (p.pts_[i] - p.pts_[i - 1]).norm();
    }
    return p;
  }

  static PathSpec straight(Vec2 from, double heading, double length, double spacing = 1.0) {
    if (length <= 0.0 || spacing <= 0.0) {
      throw std::invalid_argument("PathSpec::straight: length and spacing must be positive");
    }
    const Vec2 dir = heading_dir(heading);
    std::vector<Vec2> pts;
    const int n = std::max(1, static_cast<int>(std::ceil(length / spacing)));
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      pts.push_back(from + dir * (length * i / n));
    }
    return from_waypoints(std::move(pts));
  }

  double length() const { return cum_.back(); }

  PathPose pose_at(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, pts_.size() - 2);
    const Vec2 seg = pts_[i + 1] - pts_[i];
    const double seg_len = cum_[i + 1] - cum_[i];
    const double t = seg_len > 0.0 ? (s - cum_[i]) / seg_len : 0.0;
    return {pts_[i] + seg * t, normalize_angle(std::atan2(seg.x, seg.y))};
  }

  double final_heading() const {
    const Vec2 seg = pts_.back() - pts_[pts_.size() - 2];
    return normalize_angle(std::atan2(seg.x, seg.y));
  }

  const std::vector<Vec2>& waypoints() const { return pts_; }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// One straight main-road lane. along() measures progress from the entry in
// the driving direction.
struct LaneSpec {
  Vec2 entry;
  double heading = 0.0;
  double length = 0.0;
  double center_y = 0.0;
  double width = 0.0;

  Vec2 dir() const { return heading_dir(heading); }
  double along(const Vec2& p) const { return (p - entry).dot(dir()); }
  Vec2 point_at(double s) const { return entry + dir() * s; }

  OrientedBox strip() const {
    return {entry + dir() * (0.5 * length), heading, 0.5 * length, 0.5 * width};
  }
};

// T-junction: a two-lane main road along x, a two-lane stem from the south.
// The ego approaches north on the stem's right lane and turns onto the main
// road; the origin sits at the center of the shared junction box.
struct IntersectionLayout {
  double lane_width = 4.0;
  double main_road_length = 120.0;
  double stopline_setback = 4.0;
  double right_turn_radius = 6.0;
  double left_turn_radius = 10.0;
  double waypoint_spacing = 1.0;
  // The route ends this far past the arc, once the ego is established in the
  // destination lane; the crossing maneuver is over there, not at the road
  // edge. Keeping the goal close also keeps it inside a short planning
  // horizon once the ego is moving.
  double merge_run = 15.0;

  LaneSpec eastbound;
  LaneSpec westbound;
  double approach_x = 2.0;
  double stop_line_y = -8.0;

  static IntersectionLayout make(double lane_width = 4.0, double main_road_length = 120.0,
                                 double stopline_setback = 4.0, double right_turn_radius = 6.0,
                                 double left_turn_radius = 10.0, double waypoint_spacing = 1.0) {
    IntersectionLayout l;
    l.lane_width = lane_width;
    l.main_road_length = main_road_length;
    l.stopline_setback = stopline_setback;
    l.right_turn_radius = right_turn_radius;
    l.left_turn_radius = left_turn_radius;
    l.waypoint_spacing = waypoint_spacing;
    const double half = 0.5 * main_road_length;
    const double half_lane = 0.5 * lane_width;
    l.eastbound = {{-half, -half_lane}, 0.5 * kPi, main_road_length, -half_lane, lane_width};
    l.westbound = {{half, half_lane}, -0.5 * kPi, main_road_length, half_lane, lane_width};
    l.approach_x = half_lane;
    // The junction box spans y in [-lane_width, lane_width]; the stop line
    // sits a fixed setback south of it.
    l.stop_line_y = -(lane_width + stopline_setback);
    return l;
  }

  const LaneSpec& lane(int idx) const { return idx == 0 ? eastbound : westbound; }

  const LaneSpec& destination_lane(TurnDirection t) const {
    return t == TurnDirection::Right ? eastbound : westbound;
  }

  // Route from the stop line through the turn onto the destination lane, all
  // the way to the road end. The turn is a tangent circular arc from the
  // northbound approach to the lane heading, preceded by a straight section
  // when the radius leaves room for one.
  PathSpec turn_path(TurnDirection t) const {
    const double r = t == TurnDirection::Right ? right_turn_radius : left_turn_radius;
    const LaneSpec& dest = destination_lane(t);
    const double arc_start_y = dest.center_y - r;
    if (arc_start_y < stop_line_y - 1e-9) {
      throw std::invalid_argument("IntersectionLayout: turn radius incompatible with stop line");
    }
    const double sx = approach_x;
    std::vector<Vec2> pts;
    const double straight_len = arc_start_y - stop_line_y;
    if (straight_len > 1e-9) {
      const int n = std::max(1, static_cast<int>(std::ceil(straight_len / waypoint_spacing)));
      for (int i = 0; i < n; ++i) {
        pts.push_back({sx, stop_line_y + straight_len * i / n});
      }
    }
    const double side = t == TurnDirection::Right ? 1.0 : -1.0;
    const Vec2 center{sx + side * r, arc_start_y};
    const double arc_len = 0.5 * kPi * r;
    const int n_arc = std::max(2, static_cast<int>(std::ceil(arc_len / waypoint_spacing)));
    for (int i = 0; i <= n_arc; ++i) {
      const double h = 0.5 * kPi * i / n_arc;
      pts.push_back({center.x - side * r * std::cos(h), center.y + r * std::sin(h)});
    }
    const Vec2 arc_end{center.x, dest.center_y};
    const double to_road_end = (dest.entry + dest.dir() * dest.length - arc_end).dot(dest.dir());
    const double exit_len = std::min(to_road_end, merge_run);
    const int n_exit = std::max(1, static_cast<int>(std::ceil(exit_len / waypoint_spacing)));
    for (int i = 1; i <= n_exit; ++i) {
      pts.push_back(arc_end + dest.dir() * (exit_len * i / n_exit));
    }
    return PathSpec::from_waypoints(std::move(pts));
  }

  VehicleState ego_start() const {
    return {approach_x, stop_line_y, 0.0, 0.0, 0.0};
  }

  // Arclength at which the turn route crosses into the junction box — the
  // point of no return for a yield decision. The route's y coordinate rises
  // monotonically from the stop line through the arc, so a scan plus
  // bisection pins the crossing to millimetre precision.
  double committed_arclength(TurnDirection t) const {
    const PathSpec path = turn_path(t);
    const double box_edge_y = -lane_width;
    const double total = path.length();
    const double coarse = 0.25;
    double lo = 0.0;
    double hi = total;
    bool found = false;
    for (double s = coarse; s < total; s += coarse) {
      if (path.pose_at(s).position.y >= box_edge_y) {
        lo = s - coarse;
        hi = s;
        found = true;
        break;
      }
    }
    if (!found) {
      return total;
    }
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      (path.pose_at(mid).position.y >= box_edge_y ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace junction
