#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace junction {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

// Headings are compass style: 0 points along +y, pi/2 along +x.
inline Vec2 heading_dir(double theta) { return {std::sin(theta), std::cos(theta)}; }

// Rectangle with arbitrary orientation; half_length runs along the heading.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  std::array<Vec2, 4> corners() const {
    const Vec2 u = heading_dir(heading);
    const Vec2 w{u.y, -u.x};
    const Vec2 l = u * half_length;
    const Vec2 s = w * half_width;
    return {center + l + s, center + l - s, center - l - s, center - l + s};
  }
};

inline double projection_radius(const OrientedBox& b, const Vec2& axis) {
  const Vec2 u = heading_dir(b.heading);
  const Vec2 w{u.y, -u.x};
  return b.half_length * std::abs(axis.dot(u)) + b.half_width * std::abs(axis.dot(w));
}

// Separating-axis overlap test. Boxes are closed sets: touching counts as overlap.
inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 ua = heading_dir(a.heading);
  const Vec2 ub = heading_dir(b.heading);
  const std::array<Vec2, 4> axes{ua, Vec2{ua.y, -ua.x}, ub, Vec2{ub.y, -ub.x}};
  const Vec2 d = b.center - a.center;
  for (const Vec2& ax : axes) {
    if (std::abs(d.dot(ax)) > projection_radius(a, ax) + projection_radius(b, ax)) {
      return false;
    }
  }
  return true;
}

}  // namespace junction
