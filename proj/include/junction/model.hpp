#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "junction/dynamics.hpp"
#include "junction/random.hpp"
#include "junction/reward.hpp"
#include "junction/road.hpp"
#include "junction/types.hpp"

namespace junction {

// Everything the planner's generative model needs: the ego route, one motion
// model per behavior mode, the switching matrix, the sensor model, and the
// reward table.
struct ModelBundle {
  double dt = 0.25;
  double max_speed = 13.88;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  PathSpec path;
  MotionNoise motion;
  BehaviorSwitchMatrix switching;
  ObservationModel sensor;
  RewardConfig rewards;
};

struct EgoAdvance {
  VehicleState state;
  double arclength = 0.0;
};

// Advances the ego along its route: ds = v dt + a dt^2 / 2 (never negative, a
// braking car does not roll backwards), v' = clamp(v + a dt, 0, vmax), pose
// read back from the path at the new arclength.
inline EgoAdvance ego_step(const VehicleState& ego, double arclength, const PathSpec& path,
                           AccelAction action, double dt, double max_speed) {
  const double acc = accel_value(action);
  const double ds = std::max(0.0, ego.v * dt + 0.5 * acc * dt * dt);
  const double s = std::clamp(arclength + ds, 0.0, path.length());
  const PathPose pose = path.pose_at(s);
  EgoAdvance out;
  out.state = {pose.position.x, pose.position.y, pose.heading,
               std::clamp(ego.v + acc * dt, 0.0, max_speed), acc};
  out.arclength = s;
  return out;
}

inline BehaviorMode behavior_transition(BehaviorMode mode, const BehaviorSwitchMatrix& sw,
                                        RandomSource& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const auto& row = sw.p[static_cast<std::size_t>(mode_index(mode))];
  for (int j = 0; j < kNumBehaviorModes; ++j) {
    acc += row[static_cast<std::size_t>(j)];
    if (u < acc) {
      return static_cast<BehaviorMode>(j);
    }
  }
  return static_cast<BehaviorMode>(kNumBehaviorModes - 1);
}

// One motion-model step for a traffic vehicle: x' ~ N(T x, Q) in the mode's
// state space, mapped back to a pose (speed >= 0 by construction). The
// deterministic part is the mode's kinematic chain; the noise is sampled
// through the Kronecker factorization chol(S (x) K) = chol(S) (x) chol(K),
// with the axis spectrum S resolved at the vehicle's current heading.
inline VehicleState other_step(const VehicleState& s, BehaviorMode mode, const MotionNoise& mn,
                               double dt, RandomSource& rng) {
  ModelVector x = to_model_state(s, mode);
  if (mode == BehaviorMode::ConstantVelocity) {
    x(0) += x(1) * dt;
    x(2) += x(3) * dt;
  } else {
    const double half = 0.5 * dt * dt;
    x(0) += x(1) * dt + x(2) * half;
    x(1) += x(2) * dt;
    x(3) += x(4) * dt + x(5) * half;
    x(4) += x(5) * dt;
  }
  const double q_long = mn.longitudinal(mode);
  if (q_long > 0.0 || mn.lateral > 0.0) {
    const Eigen::Matrix2d ls = lower_chol2(heading_spectrum(s.theta, q_long, mn.lateral));
    const int k = mode == BehaviorMode::ConstantVelocity ? 2 : 3;
    ModelVector z(2 * k);
    for (int i = 0; i < 2 * k; ++i) {
      z(i) = rng.normal();
    }
    ModelVector y0(k), y1(k);
    if (mode == BehaviorMode::ConstantVelocity) {
      const Eigen::Matrix2d lk = cv_time_kernel_chol(dt);
      y0 = lk * z.head<2>();
      y1 = lk * z.tail<2>();
    } else {
      const Eigen::Matrix3d lk = ca_time_kernel_chol(dt);
      y0 = lk * z.head<3>();
      y1 = lk * z.tail<3>();
    }
    x.head(k) += ls(0, 0) * y0;
    x.tail(k) += ls(1, 0) * y0 + ls(1, 1) * y1;
  }
  return from_model_state(x, mode, s.theta);
}

inline VehicleObservation sample_observation(const VehicleState& s, const ObservationModel& obs,
                                             RandomSource& rng) {
  VehicleObservation z;
  z.x = s.x + obs.sigma_pos * rng.normal();
  z.y = s.y + obs.sigma_pos * rng.normal();
  z.theta = s.theta;
  z.v = s.v + obs.sigma_speed * rng.normal();
  return z;
}

inline bool world_in_collision(const ModelBundle& m, const WorldState& w) {
  const OrientedBox ego = vehicle_box(w.ego, m.vehicle_length, m.vehicle_width);
  for (const OtherVehicle& o : w.others) {
    if (boxes_overlap(ego, vehicle_box(o.state, m.vehicle_length, m.vehicle_width))) {
      return true;
    }
  }
  return false;
}

inline bool world_at_goal(const ModelBundle& m, const WorldState& w) {
  return w.ego_arclength >= m.path.length() - 1e-9;
}

inline double reward(const ModelBundle& m, AccelAction action, const WorldState& next) {
  const bool collided = world_in_collision(m, next);
  return reward_value(m.rewards, action, collided, !collided && world_at_goal(m, next));
}

struct TransitionOutcome {
  WorldState next;
  double reward = 0.0;
  bool terminal = false;
  bool collided = false;
  bool crossed = false;
};

// Joint transition without sensing: traffic advances under its current mode
// and then may switch; the ego follows the commanded acceleration along its
// route. Used directly by the tree search, which branches on states.
inline TransitionOutcome transition_step(const ModelBundle& m, const WorldState& w,
                                         AccelAction action, RandomSource& rng) {
  TransitionOutcome out;
  out.next.others.reserve(w.others.size());
  for (const OtherVehicle& o : w.others) {
    OtherVehicle n;
    n.state = other_step(o.state, o.mode, m.motion, m.dt, rng);
    n.mode = behavior_transition(o.mode, m.switching, rng);
    out.next.others.push_back(n);
  }
  const EgoAdvance adv = ego_step(w.ego, w.ego_arclength, m.path, action, m.dt, m.max_speed);
  out.next.ego = adv.state;
  out.next.ego_arclength = adv.arclength;
  out.collided = world_in_collision(m, out.next);
  out.crossed = !out.collided && world_at_goal(m, out.next);
  out.reward = reward_value(m.rewards, action, out.collided, out.crossed);
  out.terminal = out.collided || out.crossed;
  return out;
}

struct StepOutcome {
  WorldState next;
  std::vector<VehicleObservation> observations;
  double reward = 0.0;
  bool terminal = false;
  bool collided = false;
  bool crossed = false;
};

// Full generative step: transition plus one sampled observation per vehicle.
inline StepOutcome generative_step(const ModelBundle& m, const WorldState& w, AccelAction action,
                                   RandomSource& rng) {
  TransitionOutcome t = transition_step(m, w, action, rng);
  StepOutcome out;
  out.next = std::move(t.next);
  out.reward = t.reward;
  out.terminal = t.terminal;
  out.collided = t.collided;
  out.crossed = t.crossed;
  out.observations.reserve(out.next.others.size());
  for (const OtherVehicle& o : out.next.others) {
    out.observations.push_back(sample_observation(o.state, m.sensor, rng));
  }
  return out;
}

}  // namespace junction
