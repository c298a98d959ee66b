#pragma once

#include "junction/types.hpp"

namespace junction {

// Step rewards. The four action penalties are nearly equal on purpose: their
// ordering nudges the planner toward forward motion whenever the outcome
// distribution is otherwise indifferent, while collision and goal dominate
// everything else.
struct RewardConfig {
  double collision = -2000.0;
  double crossing = 100.0;
  double accelerate = -4.98;
  double maintain = -4.99;
  double moderate_brake = -5.0;
  double strong_brake = -5.02;
  double discount = 0.95;

  double action_penalty(AccelAction a) const {
    switch (a) {
      case AccelAction::Accelerate:
        return accelerate;
      case AccelAction::Maintain:
        return maintain;
      case AccelAction::ModerateBrake:
        return moderate_brake;
      case AccelAction::StrongBrake:
      default:
        return strong_brake;
    }
  }
};

// Collision outranks the goal when both hold in the same step.
inline double reward_value(const RewardConfig& cfg, AccelAction a, bool collided, bool crossed) {
  if (collided) {
    return cfg.collision;
  }
  if (crossed) {
    return cfg.crossing;
  }
  return cfg.action_penalty(a);
}

}  // namespace junction
