#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/random.hpp"
#include "junction/road.hpp"

using namespace junction;
using Catch::Approx;

namespace {

// Independent overlap oracle for convex quadrilaterals: vertex containment
// plus pairwise edge intersection, both inclusive so touching counts.
double cross3(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
  return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
         std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& p3, const Vec2& p4) {
  const double d1 = cross3(p3, p4, p1);
  const double d2 = cross3(p3, p4, p2);
  const double d3 = cross3(p1, p2, p3);
  const double d4 = cross3(p1, p2, p4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(p3, p1, p4)) return true;
  if (d2 == 0 && on_segment(p3, p2, p4)) return true;
  if (d3 == 0 && on_segment(p1, p3, p2)) return true;
  if (d4 == 0 && on_segment(p1, p4, p2)) return true;
  return false;
}

bool point_in_box(const Vec2& p, const OrientedBox& b) {
  const Vec2 u = heading_dir(b.heading);
  const Vec2 w{u.y, -u.x};
  const Vec2 d = p - b.center;
  return std::abs(d.dot(u)) <= b.half_length && std::abs(d.dot(w)) <= b.half_width;
}

bool oracle_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const Vec2& p : ca) {
    if (point_in_box(p, b)) return true;
  }
  for (const Vec2& p : cb) {
    if (point_in_box(p, a)) return true;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segments_intersect(ca[static_cast<std::size_t>(i)],
                             ca[static_cast<std::size_t>((i + 1) % 4)],
                             cb[static_cast<std::size_t>(j)],
                             cb[static_cast<std::size_t>((j + 1) % 4)])) {
        return true;
      }
    }
  }
  return false;
}

// Signed overlap depth on the candidate separating axes: negative means some
// axis separates the boxes. Used to skip fuzz cases sitting on the boundary.
double sat_margin(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 ua = heading_dir(a.heading);
  const Vec2 ub = heading_dir(b.heading);
  const std::array<Vec2, 4> axes{ua, Vec2{ua.y, -ua.x}, ub, Vec2{ub.y, -ub.x}};
  const Vec2 d = b.center - a.center;
  double margin = kInf;
  for (const Vec2& ax : axes) {
    margin = std::min(margin, projection_radius(a, ax) + projection_radius(b, ax) -
                                  std::abs(d.dot(ax)));
  }
  return margin;
}

}  // namespace

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(kPi) == Approx(kPi));
  CHECK(normalize_angle(-kPi) == Approx(kPi));
  CHECK(normalize_angle(1.5 * kPi) == Approx(-0.5 * kPi));
  CHECK(normalize_angle(-1.5 * kPi) == Approx(0.5 * kPi));
  CHECK(normalize_angle(2.0 * kPi) == Approx(0.0).margin(1e-12));
  CHECK(normalize_angle(100.0 * kPi + 0.1) == Approx(0.1));
  for (double a = -20.0; a <= 20.0; a += 0.37) {
    const double n = normalize_angle(a);
    CHECK(n > -kPi - 1e-12);
    CHECK(n <= kPi + 1e-12);
    CHECK(std::abs(std::sin(n) - std::sin(a)) < 1e-9);
    CHECK(std::abs(std::cos(n) - std::cos(a)) < 1e-9);
  }
}

TEST_CASE("heading_dir uses compass convention (0 = +y, pi/2 = +x)") {
  CHECK(heading_dir(0.0).x == Approx(0.0).margin(1e-15));
  CHECK(heading_dir(0.0).y == Approx(1.0));
  CHECK(heading_dir(0.5 * kPi).x == Approx(1.0));
  CHECK(heading_dir(0.5 * kPi).y == Approx(0.0).margin(1e-15));
  CHECK(heading_dir(kPi).y == Approx(-1.0));
  CHECK(heading_dir(-0.5 * kPi).x == Approx(-1.0));
}

TEST_CASE("Vec2 arithmetic") {
  const Vec2 a{3.0, 4.0};
  const Vec2 b{-1.0, 2.0};
  CHECK((a + b).x == 2.0);
  CHECK((a - b).y == 2.0);
  CHECK((a * 2.0).x == 6.0);
  CHECK(a.dot(b) == 5.0);
  CHECK(a.norm() == 5.0);
}

TEST_CASE("OrientedBox corners and projection radius") {
  // heading 0 points along +y, so half_length runs along y.
  const OrientedBox b{{0.0, 0.0}, 0.0, 2.0, 1.0};
  const auto c = b.corners();
  std::vector<Vec2> expect{{1, 2}, {-1, 2}, {-1, -2}, {1, -2}};
  for (const Vec2& e : expect) {
    bool found = false;
    for (const Vec2& p : c) {
      if ((p - e).norm() < 1e-12) found = true;
    }
    CHECK(found);
  }
  CHECK(projection_radius(b, {0.0, 1.0}) == Approx(2.0));
  CHECK(projection_radius(b, {1.0, 0.0}) == Approx(1.0));
  const OrientedBox rot{{0.0, 0.0}, 0.25 * kPi, 1.0, 1.0};
  CHECK(projection_radius(rot, {0.0, 1.0}) == Approx(std::sqrt(2.0)));
}

TEST_CASE("boxes_overlap hand cases") {
  const OrientedBox a{{0.0, 0.0}, 0.0, 1.0, 1.0};
  CHECK(boxes_overlap(a, a));  // coincident
  CHECK(boxes_overlap(a, {{0.5, 0.5}, 0.3, 0.4, 0.2}));
  CHECK_FALSE(boxes_overlap(a, {{10.0, 0.0}, 0.0, 1.0, 1.0}));
  // Touching edge: closed-set semantics count it as overlap.
  CHECK(boxes_overlap(a, {{2.0, 0.0}, 0.0, 1.0, 1.0}));
  CHECK_FALSE(boxes_overlap(a, {{2.0000001, 0.0}, 0.0, 1.0, 1.0}));
  // Touching at a single corner point.
  CHECK(boxes_overlap(a, {{2.0, 2.0}, 0.0, 1.0, 1.0}));
  // Contained box (no edge crossings).
  CHECK(boxes_overlap(a, {{0.0, 0.0}, 0.7, 0.2, 0.1}));
  // Axis-aligned bounding boxes overlap but the diagonal axis separates:
  // the rotated box's own axis is required to see the gap.
  const OrientedBox diamond{{2.2, 2.2}, 0.25 * kPi, 1.0, 1.0};
  CHECK_FALSE(boxes_overlap(a, diamond));
  CHECK(oracle_overlap(a, a));
  CHECK_FALSE(oracle_overlap(a, diamond));
}

TEST_CASE("boxes_overlap agrees with the vertex/edge oracle on random pairs") {
  RandomSource rng(20240817, 0);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const OrientedBox a{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-kPi, kPi),
                        rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
    const OrientedBox b{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-kPi, kPi),
                        rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
    if (std::abs(sat_margin(a, b)) < 1e-9) {
      continue;  // boundary case; both sides are rounding-limited there
    }
    ++checked;
    INFO("pair " << i << " centers (" << a.center.x << "," << a.center.y << ") ("
                 << b.center.x << "," << b.center.y << ")");
    REQUIRE(boxes_overlap(a, b) == oracle_overlap(a, b));
  }
  CHECK(checked >= 1900);
}

TEST_CASE("PathSpec straight line") {
  const PathSpec p = PathSpec::straight({0.0, 0.0}, 0.0, 10.0);
  CHECK(p.length() == Approx(10.0));
  CHECK(p.pose_at(3.5).position.y == Approx(3.5));
  CHECK(p.pose_at(3.5).position.x == Approx(0.0).margin(1e-12));
  CHECK(p.pose_at(3.5).heading == Approx(0.0).margin(1e-12));
  // Clamping at both ends.
  CHECK(p.pose_at(-1.0).position.y == Approx(0.0).margin(1e-12));
  CHECK(p.pose_at(25.0).position.y == Approx(10.0));
  CHECK(p.final_heading() == Approx(0.0).margin(1e-12));
  const PathSpec east = PathSpec::straight({1.0, 2.0}, 0.5 * kPi, 8.0);
  CHECK(east.pose_at(4.0).position.x == Approx(5.0));
  CHECK(east.pose_at(4.0).position.y == Approx(2.0));
  CHECK(east.pose_at(4.0).heading == Approx(0.5 * kPi));
  CHECK_THROWS_AS(PathSpec::straight({0, 0}, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("PathSpec polyline, dedup, and heading at segment boundaries") {
  const PathSpec p = PathSpec::from_waypoints({{0, 0}, {0, 0}, {0, 5}, {3, 5}});
  CHECK(p.length() == Approx(8.0));
  CHECK(p.waypoints().size() == 3);
  CHECK(p.pose_at(4.999).heading == Approx(0.0).margin(1e-12));
  // At the corner the second segment's heading applies (east).
  CHECK(p.pose_at(5.0).heading == Approx(0.5 * kPi));
  CHECK(p.pose_at(6.5).position.x == Approx(1.5));
  CHECK(p.pose_at(6.5).position.y == Approx(5.0));
  CHECK(p.final_heading() == Approx(0.5 * kPi));
  CHECK(p.pose_at(p.length()).position.x == Approx(3.0));
  CHECK_THROWS_AS(PathSpec::from_waypoints({{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(PathSpec::from_waypoints({{1, 1}, {1, 1}}), std::invalid_argument);
}

TEST_CASE("Intersection layout lanes and frames") {
  const IntersectionLayout l = IntersectionLayout::make();
  CHECK(l.eastbound.entry.x == Approx(-60.0));
  CHECK(l.eastbound.entry.y == Approx(-2.0));
  CHECK(l.eastbound.heading == Approx(0.5 * kPi));
  CHECK(l.eastbound.length == Approx(120.0));
  CHECK(l.westbound.entry.x == Approx(60.0));
  CHECK(l.westbound.entry.y == Approx(2.0));
  CHECK(l.westbound.heading == Approx(-0.5 * kPi));
  CHECK(l.stop_line_y == Approx(-8.0));
  CHECK(l.approach_x == Approx(2.0));
  CHECK(l.eastbound.along({0.0, -2.0}) == Approx(60.0));
  CHECK(l.eastbound.point_at(60.0).x == Approx(0.0).margin(1e-9));
  CHECK(l.westbound.along({0.0, 2.0}) == Approx(60.0));
  CHECK(l.westbound.point_at(0.0).x == Approx(60.0));
  // The lane strip covers a car on the centerline and not one off the road.
  const OrientedBox car{{0.0, -2.0}, 0.5 * kPi, 2.25, 0.9};
  CHECK(boxes_overlap(l.eastbound.strip(), car));
  const OrientedBox away{{0.0, -20.0}, 0.5 * kPi, 2.25, 0.9};
  CHECK_FALSE(boxes_overlap(l.eastbound.strip(), away));
  CHECK(l.ego_start().x == Approx(2.0));
  CHECK(l.ego_start().y == Approx(-8.0));
  CHECK(l.ego_start().v == 0.0);
  CHECK(&l.destination_lane(TurnDirection::Right) == &l.eastbound);
  CHECK(&l.destination_lane(TurnDirection::Left) == &l.westbound);
}

TEST_CASE("Turn paths: geometry, length, and endpoints") {
  const IntersectionLayout l = IntersectionLayout::make();

  const PathSpec right = l.turn_path(TurnDirection::Right);
  // Quarter arc of radius 6 as 1 m chords plus the 15 m merge run.
  CHECK(right.length() == Approx(24.415).margin(0.05));
  CHECK(right.pose_at(0.0).position.x == Approx(2.0));
  CHECK(right.pose_at(0.0).position.y == Approx(-8.0));
  CHECK(std::abs(right.pose_at(0.0).heading) < 0.1);  // starts near north
  const PathPose rend = right.pose_at(right.length());
  CHECK(rend.position.x == Approx(23.0).margin(1e-6));
  CHECK(rend.position.y == Approx(-2.0).margin(1e-6));
  CHECK(right.final_heading() == Approx(0.5 * kPi));

  const PathSpec left = l.turn_path(TurnDirection::Left);
  CHECK(left.length() == Approx(30.702).margin(0.05));
  CHECK(left.pose_at(0.0).position.x == Approx(2.0));
  CHECK(left.pose_at(0.0).position.y == Approx(-8.0));
  const PathPose lend = left.pose_at(left.length());
  CHECK(lend.position.x == Approx(-23.0).margin(1e-6));
  CHECK(lend.position.y == Approx(2.0).margin(1e-6));
  CHECK(left.final_heading() == Approx(-0.5 * kPi));

  // Arclength is strictly monotone along the stored waypoints.
  for (const PathSpec* p : {&right, &left}) {
    const auto& w = p->waypoints();
    for (std::size_t i = 1; i < w.size(); ++i) {
      CHECK((w[i] - w[i - 1]).norm() > 1e-9);
    }
  }

  // A shorter merge run shortens the route by exactly the difference.
  IntersectionLayout trimmed = IntersectionLayout::make();
  trimmed.merge_run = 5.0;
  const PathSpec short_right = trimmed.turn_path(TurnDirection::Right);
  CHECK(right.length() - short_right.length() == Approx(10.0).margin(1e-9));
  CHECK(short_right.pose_at(short_right.length()).position.x == Approx(13.0).margin(1e-6));

  // A turn radius reaching below the stop line is rejected.
  const IntersectionLayout bad = IntersectionLayout::make(4.0, 120.0, 4.0, 7.0, 10.0);
  CHECK_THROWS_AS(bad.turn_path(TurnDirection::Right), std::invalid_argument);
}
