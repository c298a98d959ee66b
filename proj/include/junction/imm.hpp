#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "junction/kalman.hpp"
#include "junction/model.hpp"
#include "junction/random.hpp"

namespace junction {

// Indices of the velocity-model components inside the acceleration-model
// state [x, vx, ax, y, vy, ay].
inline constexpr std::array<int, 4> kCvInCa{0, 1, 3, 4};

// Prior variance assigned to the acceleration components that the source
// estimate does not carry, expressed in the vehicle's own frame. Along the
// heading: ±1 m/s^2 at one sigma, the scale expected of a car currently
// believed to be driving steadily. Across the heading: a token variance only.
// Lanes are straight and headings are sensed exactly, so lateral acceleration
// is identically zero for every vehicle; anything larger here leaks back in
// on every cycle (mixing re-embeds the velocity-model estimate through this
// pad) and lets sampled futures drift vehicles out of their lanes, which
// reads as a phantom side-swipe to the planner. Padding with exactly zero
// instead would pin the accelerating model's extra state and make a real
// velocity ramp inexplicable to it.
inline constexpr double kAccelPriorVar = 1.0;
inline constexpr double kLateralAccelPriorVar = 1e-4;

// Embeds a velocity-model estimate in the acceleration-model state space:
// zero acceleration mean, heading-aligned acceleration variance, no cross
// terms against the carried components. The vehicle heading is observed
// noise-free, so the longitudinal/lateral split is exact.
inline GaussianEstimate pad_cv_to_ca(const GaussianEstimate& cv, double theta,
                                     double long_var = kAccelPriorVar,
                                     double lat_var = kLateralAccelPriorVar) {
  GaussianEstimate out;
  out.mean = ModelVector::Zero(6);
  out.cov = ModelMatrix::Zero(6, 6);
  const Vec2 u = heading_dir(theta);
  out.cov(2, 2) = long_var * u.x * u.x + lat_var * u.y * u.y;
  out.cov(5, 5) = long_var * u.y * u.y + lat_var * u.x * u.x;
  out.cov(2, 5) = out.cov(5, 2) = (long_var - lat_var) * u.x * u.y;
  for (int i = 0; i < 4; ++i) {
    out.mean(kCvInCa[static_cast<std::size_t>(i)]) = cv.mean(i);
    for (int j = 0; j < 4; ++j) {
      out.cov(kCvInCa[static_cast<std::size_t>(i)], kCvInCa[static_cast<std::size_t>(j)]) =
          cv.cov(i, j);
    }
  }
  return out;
}

inline GaussianEstimate truncate_ca_to_cv(const GaussianEstimate& ca) {
  GaussianEstimate out;
  out.mean = ModelVector::Zero(4);
  out.cov = ModelMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    out.mean(i) = ca.mean(kCvInCa[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 4; ++j) {
      out.cov(i, j) =
          ca.cov(kCvInCa[static_cast<std::size_t>(i)], kCvInCa[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

// Maps an estimate into the state space of the requested dimension. Equal
// dimensions pass through; 4 <-> 6 use the velocity/acceleration embedding,
// with the vehicle heading orienting the padded acceleration prior.
inline GaussianEstimate map_to_dim(const GaussianEstimate& est, int dim, double theta) {
  if (est.dim() == dim) {
    return est;
  }
  if (est.dim() == 4 && dim == 6) {
    return pad_cv_to_ca(est, theta);
  }
  if (est.dim() == 6 && dim == 4) {
    return truncate_ca_to_cv(est);
  }
  throw std::invalid_argument("map_to_dim: unsupported state-space pair");
}

// Moment-matched Gaussian of a mixture: the covariance picks up the spread of
// the component means around the mixture mean.
inline GaussianEstimate moment_match(std::span<const double> w,
                                     std::span<const GaussianEstimate> comps) {
  if (w.size() != comps.size() || comps.empty()) {
    throw std::invalid_argument("moment_match: component/weight count mismatch");
  }
  const int n = comps[0].dim();
  GaussianEstimate out;
  out.mean = ModelVector::Zero(n);
  out.cov = ModelMatrix::Zero(n, n);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].dim() != n) {
      throw std::invalid_argument("moment_match: component dimensions disagree");
    }
    out.mean += w[i] * comps[i].mean;
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const ModelVector d = comps[i].mean - out.mean;
    out.cov += w[i] * (comps[i].cov + (d * d.transpose()).eval());
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

inline constexpr double kLikelihoodFloor = 1e-300;

struct ImmComponents {
  std::array<GaussianEstimate, kNumBehaviorModes> est;
  std::array<double, kNumBehaviorModes> mu{0.5, 0.5};
  bool likelihood_floor_hit = false;
};

// One interacting-multiple-model cycle: mix per-mode estimates with the
// switching weights, predict and update each mode's filter, then renormalize
// the mode probabilities by predicted prior times innovation likelihood.
// When every likelihood underflows, the measurement is skipped: predicted
// estimates and predicted mode probabilities are kept.
inline ImmComponents imm_core(const ImmComponents& prior, const BehaviorSwitchMatrix& sw,
                              const std::array<const DynamicsModel*, kNumBehaviorModes>& dyn,
                              const Eigen::VectorXd& z,
                              const std::array<Eigen::MatrixXd, kNumBehaviorModes>& h,
                              const Eigen::MatrixXd& r, double theta) {
  std::array<double, kNumBehaviorModes> c{};
  for (int j = 0; j < kNumBehaviorModes; ++j) {
    for (int i = 0; i < kNumBehaviorModes; ++i) {
      c[static_cast<std::size_t>(j)] +=
          sw.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
          prior.mu[static_cast<std::size_t>(i)];
    }
  }
  ImmComponents out;
  std::array<GaussianEstimate, kNumBehaviorModes> predicted;
  std::array<double, kNumBehaviorModes> raw{};
  std::array<KalmanUpdate, kNumBehaviorModes> updates;
  for (int j = 0; j < kNumBehaviorModes; ++j) {
    const std::size_t ju = static_cast<std::size_t>(j);
    GaussianEstimate mixed;
    if (c[ju] <= 0.0) {
      // No probability mass flows into this mode; carry its estimate along.
      mixed = prior.est[ju];
    } else {
      std::array<double, kNumBehaviorModes> w{};
      std::array<GaussianEstimate, kNumBehaviorModes> comps;
      for (int i = 0; i < kNumBehaviorModes; ++i) {
        const std::size_t iu = static_cast<std::size_t>(i);
        w[iu] = sw.p[iu][ju] * prior.mu[iu] / c[ju];
        comps[iu] = map_to_dim(prior.est[iu], dyn[ju]->dim(), theta);
      }
      mixed = moment_match(w, comps);
    }
    predicted[ju] = kalman_predict(mixed, *dyn[ju]);
    updates[ju] = kalman_update_linear(predicted[ju], z, h[ju], r);
    raw[ju] = c[ju] * updates[ju].likelihood;
  }
  const double total = raw[0] + raw[1];
  if (total <= kLikelihoodFloor) {
    out.mu = c;
    out.est = predicted;
    out.likelihood_floor_hit = true;
  } else {
    for (int j = 0; j < kNumBehaviorModes; ++j) {
      const std::size_t ju = static_cast<std::size_t>(j);
      out.mu[ju] = raw[ju] / total;
      out.est[ju] = updates[ju].posterior;
    }
  }
  return out;
}

// Per-vehicle track: one estimate per behavior mode plus mode probabilities.
// The heading is taken verbatim from the latest observation.
struct VehicleTrack {
  int id = -1;
  double theta = 0.0;
  std::array<GaussianEstimate, kNumBehaviorModes> model_est;
  std::array<double, kNumBehaviorModes> mu{0.5, 0.5};
  std::uint64_t likelihood_floor_hits = 0;
};

// Exactly known ego plus one track per traffic vehicle.
struct ImmBelief {
  VehicleState ego;
  double ego_arclength = 0.0;
  std::vector<VehicleTrack> tracks;
};

inline VehicleTrack init_track(int id, const VehicleObservation& z,
                               const ObservationModel& obs) {
  VehicleTrack t;
  t.id = id;
  t.theta = z.theta;
  const Vec2 u = heading_dir(z.theta);
  const double pvar = obs.sigma_pos * obs.sigma_pos;
  const double vvar = obs.sigma_speed * obs.sigma_speed;
  GaussianEstimate cv;
  cv.mean = ModelVector::Zero(4);
  cv.mean << z.x, z.v * u.x, z.y, z.v * u.y;
  cv.cov = ModelMatrix::Zero(4, 4);
  cv.cov.diagonal() << pvar, vvar, pvar, vvar;
  t.model_est[0] = cv;
  t.model_est[1] = pad_cv_to_ca(cv, z.theta);
  t.mu = {0.5, 0.5};
  return t;
}

inline VehicleTrack imm_step(const VehicleTrack& track, const VehicleObservation& z,
                             const ModelBundle& m) {
  ImmComponents prior;
  prior.est = track.model_est;
  prior.mu = track.mu;
  Eigen::VectorXd vz(3);
  vz << z.x, z.y, z.v;
  std::array<Eigen::MatrixXd, kNumBehaviorModes> h;
  std::array<DynamicsModel, kNumBehaviorModes> models;
  std::array<const DynamicsModel*, kNumBehaviorModes> dyn{};
  for (int j = 0; j < kNumBehaviorModes; ++j) {
    const BehaviorMode mode = static_cast<BehaviorMode>(j);
    h[static_cast<std::size_t>(j)] = m.sensor.measurement(mode, z.theta);
    models[static_cast<std::size_t>(j)] = m.motion.resolve(mode, z.theta, m.dt);
    dyn[static_cast<std::size_t>(j)] = &models[static_cast<std::size_t>(j)];
  }
  const ImmComponents post =
      imm_core(prior, m.switching, dyn, vz, h, m.sensor.noise_cov(), z.theta);
  VehicleTrack out = track;
  out.theta = z.theta;
  out.model_est = post.est;
  out.mu = post.mu;
  if (post.likelihood_floor_hit) {
    ++out.likelihood_floor_hits;
  }
  return out;
}

// Moment-matched fusion of the per-mode estimates in the six-dimensional
// space (the velocity-model estimate is embedded with zero acceleration).
inline GaussianEstimate combined_estimate(const VehicleTrack& t) {
  const std::array<GaussianEstimate, 2> comps{map_to_dim(t.model_est[0], 6, t.theta),
                                              map_to_dim(t.model_est[1], 6, t.theta)};
  return moment_match(t.mu, comps);
}

inline ModelVector sample_gaussian(const GaussianEstimate& est, RandomSource& rng) {
  if (est.cov.norm() <= 0.0) {
    return est.mean;
  }
  const int n = est.dim();
  ModelMatrix jittered = est.cov;
  jittered.diagonal().array() += 1e-12;
  Eigen::LLT<ModelMatrix> llt(jittered);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("sample_gaussian: covariance not positive semi-definite");
  }
  ModelVector z(n);
  for (int i = 0; i < n; ++i) {
    z(i) = rng.normal();
  }
  return est.mean + ModelMatrix(llt.matrixL()) * z;
}

// Draws a full world state: ego copied exactly; for each track a mode is
// drawn from mu and a state from that mode's Gaussian.
inline WorldState belief_sample(const ImmBelief& belief, RandomSource& rng) {
  WorldState w;
  w.ego = belief.ego;
  w.ego_arclength = belief.ego_arclength;
  w.others.reserve(belief.tracks.size());
  for (const VehicleTrack& t : belief.tracks) {
    const BehaviorMode mode = rng.uniform() < t.mu[0] ? BehaviorMode::ConstantVelocity
                                                      : BehaviorMode::ConstantAcceleration;
    const GaussianEstimate& est = t.model_est[static_cast<std::size_t>(mode_index(mode))];
    const ModelVector x = sample_gaussian(est, rng);
    w.others.push_back({from_model_state(x, mode, t.theta), mode});
  }
  return w;
}

}  // namespace junction
