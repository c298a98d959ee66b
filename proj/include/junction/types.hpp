#pragma once

#include <array>
#include <vector>

#include "junction/geometry.hpp"

namespace junction {

// Longitudinal acceleration command available to the ego, m/s^2.
enum class AccelAction : int { StrongBrake = 0, ModerateBrake = 1, Maintain = 2, Accelerate = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<double, kNumActions> kActionAccel{-4.0, -2.0, 0.0, 2.0};
inline constexpr std::array<AccelAction, kNumActions> kAllActions{
    AccelAction::StrongBrake, AccelAction::ModerateBrake, AccelAction::Maintain,
    AccelAction::Accelerate};

inline double accel_value(AccelAction a) { return kActionAccel[static_cast<int>(a)]; }
inline AccelAction action_from_index(int i) { return static_cast<AccelAction>(i); }
inline int action_index(AccelAction a) { return static_cast<int>(a); }

// Motion pattern a traffic vehicle is currently following.
enum class BehaviorMode : int { ConstantVelocity = 0, ConstantAcceleration = 1 };

inline constexpr int kNumBehaviorModes = 2;
inline int mode_index(BehaviorMode m) { return static_cast<int>(m); }

// Pose and longitudinal motion of one vehicle. theta is a compass heading in
// (-pi, pi] (0 = +y, pi/2 = +x); v >= 0; a is the applied longitudinal
// acceleration.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double a = 0.0;

  Vec2 position() const { return {x, y}; }
};

struct OtherVehicle {
  VehicleState state;
  BehaviorMode mode = BehaviorMode::ConstantVelocity;
};

// Full planner state: the ego (exactly known, tied to its route by arclength)
// plus every tracked traffic vehicle with its behavior mode.
struct WorldState {
  VehicleState ego;
  double ego_arclength = 0.0;
  std::vector<OtherVehicle> others;
};

// Sensor return for one traffic vehicle: noisy position and speed, exact heading.
struct VehicleObservation {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
};

inline OrientedBox vehicle_box(const VehicleState& s, double length, double width) {
  return {{s.x, s.y}, s.theta, 0.5 * length, 0.5 * width};
}

}  // namespace junction
