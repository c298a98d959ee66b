#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "junction/dynamics.hpp"

namespace junction {

struct GaussianEstimate {
  ModelVector mean;
  ModelMatrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

inline GaussianEstimate kalman_predict(const GaussianEstimate& est, const DynamicsModel& dyn) {
  if (est.dim() != dyn.dim()) {
    throw std::invalid_argument("kalman_predict: state and model dimensions disagree");
  }
  GaussianEstimate out;
  out.mean = dyn.transition * est.mean;
  out.cov = dyn.transition * est.cov * dyn.transition.transpose() + dyn.noise;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

struct KalmanUpdate {
  GaussianEstimate posterior;
  double likelihood = 0.0;  // innovation density N(z; H x, H P H' + R)
};

// Measurement update for any linear observation. Joseph-form covariance keeps
// the posterior symmetric positive semi-definite. Throws when dimensions
// disagree or the innovation covariance is not positive definite.
inline KalmanUpdate kalman_update_linear(const GaussianEstimate& est,
                                         const Eigen::VectorXd& z, const Eigen::MatrixXd& h,
                                         const Eigen::MatrixXd& r) {
  const int n = est.dim();
  const int m = static_cast<int>(z.size());
  if (h.rows() != m || h.cols() != n || r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("kalman_update: observation dimensions disagree");
  }
  const Eigen::MatrixXd p = est.cov;
  const Eigen::MatrixXd s = h * p * h.transpose() + r;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kalman_update: innovation covariance not positive definite");
  }
  const Eigen::VectorXd innov = z - h * est.mean;
  const Eigen::MatrixXd gain = llt.solve(h * p).transpose();  // P H' S^-1
  KalmanUpdate out;
  out.posterior.mean = est.mean + gain * innov;
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - gain * h;
  Eigen::MatrixXd cov = ikh * p * ikh.transpose() + gain * r * gain.transpose();
  out.posterior.cov = 0.5 * (cov + cov.transpose());
  const double maha = innov.dot(llt.solve(innov));
  double logdet = 0.0;
  for (int i = 0; i < m; ++i) {
    logdet += std::log(llt.matrixL()(i, i));
  }
  logdet *= 2.0;
  out.likelihood = std::exp(-0.5 * (maha + logdet + m * std::log(2.0 * kPi)));
  return out;
}

// Vehicle-sensor update: builds H from the exactly known heading and z from
// the (x, y, v) part of the observation.
inline KalmanUpdate kalman_update(const GaussianEstimate& est, const VehicleObservation& z,
                                  const ObservationModel& obs, BehaviorMode mode) {
  Eigen::VectorXd vz(3);
  vz << z.x, z.y, z.v;
  return kalman_update_linear(est, vz, obs.measurement(mode, z.theta), obs.noise_cov());
}

}  // namespace junction
