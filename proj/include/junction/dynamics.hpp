#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>

#include "junction/geometry.hpp"
#include "junction/types.hpp"

namespace junction {

// Fixed-capacity dynamic matrices: model states are at most 6-dimensional, so
// everything stays on the stack.
using ModelVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using ModelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;
using MeasurementMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 6>;

// Two-by-two spectral density of the driving white noise over the world axes,
// resolved in the vehicle frame: intensity q_long along the heading, q_lat
// across it. S = q_long u u^T + q_lat r r^T with u the heading direction and
// r its perpendicular.
inline Eigen::Matrix2d heading_spectrum(double theta, double q_long, double q_lat) {
  const Vec2 u = heading_dir(theta);
  Eigen::Matrix2d s;
  s(0, 0) = q_long * u.x * u.x + q_lat * u.y * u.y;
  s(1, 1) = q_long * u.y * u.y + q_lat * u.x * u.x;
  s(0, 1) = s(1, 0) = (q_long - q_lat) * u.x * u.y;
  return s;
}

// Closed-form lower Cholesky factor of a 2x2 PSD matrix (rank-deficient
// inputs get a valid PSD factor rather than a failure).
inline Eigen::Matrix2d lower_chol2(const Eigen::Matrix2d& s) {
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  if (s(0, 0) > 0.0) {
    l(0, 0) = std::sqrt(s(0, 0));
    l(1, 0) = s(1, 0) / l(0, 0);
    l(1, 1) = std::sqrt(std::max(0.0, s(1, 1) - l(1, 0) * l(1, 0)));
  } else {
    l(1, 1) = std::sqrt(std::max(0.0, s(1, 1)));
  }
  return l;
}

// Per-axis time kernels of the discretized models: integrating white noise of
// unit density through the kinematic chain over one step couples the state
// derivatives with these fixed weights. The full Q for a given axis spectrum
// S is the Kronecker product S (x) kernel in axis-major state order.
inline Eigen::Matrix2d cv_time_kernel(double dt) {
  Eigen::Matrix2d k;
  k(0, 0) = dt * dt * dt / 3.0;
  k(0, 1) = k(1, 0) = dt * dt / 2.0;
  k(1, 1) = dt;
  return k;
}

inline Eigen::Matrix3d ca_time_kernel(double dt) {
  const double d2 = dt * dt;
  Eigen::Matrix3d k;
  k(0, 0) = d2 * d2 * dt / 20.0;
  k(0, 1) = k(1, 0) = d2 * d2 / 8.0;
  k(0, 2) = k(2, 0) = d2 * dt / 6.0;
  k(1, 1) = d2 * dt / 3.0;
  k(1, 2) = k(2, 1) = d2 / 2.0;
  k(2, 2) = dt;
  return k;
}

// Closed-form lower Cholesky factors of the time kernels (positive definite
// for dt > 0; entries verified against L L^T = kernel in the test suite).
inline Eigen::Matrix2d cv_time_kernel_chol(double dt) {
  const double rdt = std::sqrt(dt);
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = dt * rdt / std::sqrt(3.0);
  l(1, 0) = std::sqrt(3.0) * rdt / 2.0;
  l(1, 1) = rdt / 2.0;
  return l;
}

inline Eigen::Matrix3d ca_time_kernel_chol(double dt) {
  const double rdt = std::sqrt(dt);
  Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
  l(0, 0) = dt * dt * rdt / std::sqrt(20.0);
  l(1, 0) = std::sqrt(5.0) / 4.0 * dt * rdt;
  l(1, 1) = dt * rdt / std::sqrt(48.0);
  l(2, 0) = std::sqrt(5.0) / 3.0 * rdt;
  l(2, 1) = rdt / std::sqrt(3.0);
  l(2, 2) = rdt / 3.0;
  return l;
}

// Kronecker product a (x) b in axis-major order: block (i, j) is a(i, j) * b.
template <typename Inner>
inline ModelMatrix axis_kron(const Eigen::Matrix2d& a, const Inner& b) {
  const int k = static_cast<int>(b.rows());
  ModelMatrix out = ModelMatrix::Zero(2 * k, 2 * k);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block(k * i, k * j, k, k) = a(i, j) * b;
    }
  }
  return out;
}

// Discrete linear-Gaussian motion model x' = T x + w, w ~ N(0, Q).
struct DynamicsModel {
  ModelMatrix transition;
  ModelMatrix noise;
  ModelMatrix noise_chol;  // lower Cholesky factor of Q, zero when Q = 0

  int dim() const { return static_cast<int>(transition.rows()); }

  static DynamicsModel from_matrices(ModelMatrix transition, ModelMatrix noise) {
    DynamicsModel m;
    m.transition = std::move(transition);
    m.noise = std::move(noise);
    if (m.noise.rows() != m.transition.rows() || m.noise.cols() != m.transition.cols()) {
      throw std::invalid_argument("DynamicsModel: T and Q dimensions disagree");
    }
    if (m.noise.norm() > 0.0) {
      Eigen::LLT<ModelMatrix> llt(m.noise);
      if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("DynamicsModel: Q must be positive semi-definite");
      }
      m.noise_chol = llt.matrixL();
    } else {
      m.noise_chol = ModelMatrix::Zero(m.noise.rows(), m.noise.cols());
    }
    return m;
  }

  // State [x, vx, y, vy]; Q discretizes continuous white-noise acceleration
  // with the given per-axis spectral density (m^2/s^3). The Cholesky factor
  // comes from the Kronecker structure: chol(S (x) K) = chol(S) (x) chol(K).
  static DynamicsModel constant_velocity(double dt, const Eigen::Matrix2d& density) {
    ModelMatrix t = ModelMatrix::Identity(4, 4);
    t(0, 1) = dt;
    t(2, 3) = dt;
    DynamicsModel m;
    m.transition = std::move(t);
    m.noise = axis_kron(density, cv_time_kernel(dt));
    m.noise_chol = axis_kron(lower_chol2(density), cv_time_kernel_chol(dt));
    return m;
  }

  static DynamicsModel constant_velocity(double dt, double noise_density) {
    return constant_velocity(dt, Eigen::Matrix2d(noise_density * Eigen::Matrix2d::Identity()));
  }

  // State [x, vx, ax, y, vy, ay]; Q discretizes continuous white-noise jerk
  // with the given per-axis spectral density (m^2/s^5).
  static DynamicsModel constant_acceleration(double dt, const Eigen::Matrix2d& density) {
    ModelMatrix t = ModelMatrix::Identity(6, 6);
    for (int b = 0; b < 6; b += 3) {
      t(b, b + 1) = dt;
      t(b, b + 2) = 0.5 * dt * dt;
      t(b + 1, b + 2) = dt;
    }
    DynamicsModel m;
    m.transition = std::move(t);
    m.noise = axis_kron(density, ca_time_kernel(dt));
    m.noise_chol = axis_kron(lower_chol2(density), ca_time_kernel_chol(dt));
    return m;
  }

  static DynamicsModel constant_acceleration(double dt, double noise_density) {
    return constant_acceleration(dt,
                                 Eigen::Matrix2d(noise_density * Eigen::Matrix2d::Identity()));
  }
};

// Process-noise intensities for traffic vehicles, resolved in the vehicle
// frame. The heading is sensed exactly and lanes are straight, so real
// behavior changes (braking for a leader, queue discharge, emergency stops)
// are purely longitudinal; the lateral density is a small positive
// regularizer that keeps covariances invertible, not a physical degree of
// freedom. Shaping the noise this way matters doubly: the tracker's forecast
// and the planner's imagined rollouts both integrate it over multi-second
// horizons, where an isotropic density of useful longitudinal size would
// smear vehicles metres out of their own lanes and poison every crossing
// plan with phantom side-swipes.
struct MotionNoise {
  double longitudinal_cv = 1.0;  // white-acceleration density along the heading
  double longitudinal_ca = 1.0;  // white-jerk density along the heading
  double lateral = 1e-3;         // cross-lane density shared by both models

  double longitudinal(BehaviorMode m) const {
    return m == BehaviorMode::ConstantVelocity ? longitudinal_cv : longitudinal_ca;
  }

  Eigen::Matrix2d spectrum(BehaviorMode m, double theta) const {
    return heading_spectrum(theta, longitudinal(m), lateral);
  }

  DynamicsModel resolve(BehaviorMode m, double theta, double dt) const {
    return m == BehaviorMode::ConstantVelocity
               ? DynamicsModel::constant_velocity(dt, spectrum(m, theta))
               : DynamicsModel::constant_acceleration(dt, spectrum(m, theta));
  }
};

inline int mode_dim(BehaviorMode m) {
  return m == BehaviorMode::ConstantVelocity ? 4 : 6;
}

// Mapping between vehicle poses and model-space vectors: the heading
// decomposes speed (and, for the acceleration model, longitudinal
// acceleration) into Cartesian components.
inline ModelVector to_model_state(const VehicleState& s, BehaviorMode m) {
  const Vec2 u = heading_dir(s.theta);
  ModelVector v(mode_dim(m));
  if (m == BehaviorMode::ConstantVelocity) {
    v << s.x, s.v * u.x, s.y, s.v * u.y;
  } else {
    v << s.x, s.v * u.x, s.a * u.x, s.y, s.v * u.y, s.a * u.y;
  }
  return v;
}

// Below one millimetre per second the velocity direction carries no signal —
// it is dominated by sensor noise and by the tiny diagonal jitter used when
// sampling from near-degenerate covariances — so such a state reads as rest.
inline constexpr double kHeadingSpeedFloor = 1e-3;

// Inverse mapping. Speed is the velocity norm (never negative); the heading
// follows the velocity direction, falling back to the supplied heading when
// the vehicle is essentially at rest.
inline VehicleState from_model_state(const ModelVector& v, BehaviorMode m,
                                     double fallback_heading) {
  VehicleState s;
  double vx, vy;
  if (m == BehaviorMode::ConstantVelocity) {
    s.x = v(0);
    vx = v(1);
    s.y = v(2);
    vy = v(3);
    s.a = 0.0;
  } else {
    s.x = v(0);
    vx = v(1);
    s.y = v(3);
    vy = v(4);
    s.a = 0.0;  // filled below once the direction is known
  }
  s.v = std::hypot(vx, vy);
  if (s.v > kHeadingSpeedFloor) {
    s.theta = normalize_angle(std::atan2(vx, vy));
  } else {
    s.v = 0.0;
    s.theta = normalize_angle(fallback_heading);
  }
  if (m == BehaviorMode::ConstantAcceleration) {
    const Vec2 u = heading_dir(s.theta);
    s.a = v(2) * u.x + v(5) * u.y;
  }
  return s;
}

// Markov switching matrix over behavior modes; p[i][j] = P(next = j | cur = i).
struct BehaviorSwitchMatrix {
  std::array<std::array<double, kNumBehaviorModes>, kNumBehaviorModes> p{
      {{0.98, 0.02}, {0.02, 0.98}}};

  static BehaviorSwitchMatrix symmetric(double stay) {
    if (stay < 0.0 || stay > 1.0) {
      throw std::invalid_argument("BehaviorSwitchMatrix: stay probability out of [0, 1]");
    }
    BehaviorSwitchMatrix m;
    m.p = {{{stay, 1.0 - stay}, {1.0 - stay, stay}}};
    return m;
  }

  static BehaviorSwitchMatrix identity() { return symmetric(1.0); }
};

// Sensor model for (z_x, z_y, z_v): independent Gaussian noise on position
// and speed; the heading is reported exactly and passes outside the filter.
struct ObservationModel {
  double sigma_pos = 0.1;
  double sigma_speed = 0.1;

  Eigen::Matrix3d noise_cov() const {
    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    r(0, 0) = sigma_pos * sigma_pos;
    r(1, 1) = sigma_pos * sigma_pos;
    r(2, 2) = sigma_speed * sigma_speed;
    return r;
  }

  // Measurement matrix onto (x, y, v). Speed is linear in the velocity
  // components once projected onto the exactly known direction of travel.
  MeasurementMatrix measurement(BehaviorMode m, double theta) const {
    const Vec2 u = heading_dir(theta);
    MeasurementMatrix h = MeasurementMatrix::Zero(3, mode_dim(m));
    if (m == BehaviorMode::ConstantVelocity) {
      h(0, 0) = 1.0;
      h(1, 2) = 1.0;
      h(2, 1) = u.x;
      h(2, 3) = u.y;
    } else {
      h(0, 0) = 1.0;
      h(1, 3) = 1.0;
      h(2, 1) = u.x;
      h(2, 4) = u.y;
    }
    return h;
  }
};

}  // namespace junction
