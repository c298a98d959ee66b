#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction {

struct IdmParams {
  double desired_speed = 13.88;  // m/s
  double time_headway = 1.0;     // s
  double min_gap = 2.0;          // m
  double max_accel = 2.0;        // m/s^2
  double comfort_decel = 2.0;    // m/s^2
  double exponent = 4.0;
  double max_decel = 9.0;        // m/s^2, physical braking limit (magnitude)
};

// Intelligent-driver-model acceleration. gap is the bumper-to-bumper distance
// to the leader and must be positive; pass +inf for a free road. closing is
// v - v_leader. The desired-gap speed term is floored at zero so a strongly
// receding leader cannot command extra braking.
inline double idm_accel(const IdmParams& p, double v, double gap, double closing) {
  if (!(gap > 0.0)) {
    throw std::invalid_argument("idm_accel: gap must be positive");
  }
  const double interaction =
      v * p.time_headway + v * closing / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  const double s_star = p.min_gap + std::max(0.0, interaction);
  const double ratio = s_star / gap;
  const double a =
      p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.exponent) - ratio * ratio);
  return std::clamp(a, -p.max_decel, p.max_accel);
}

}  // namespace junction
