#pragma once

// Scalar two-mode filtering oracle: exhaustive Bayes over every mode sequence
// versus the library's interacting-multiple-model cycle on the same problem.
//
// With a perfect measurement (r = 0) the per-mode posteriors collapse to a
// point after every update, the mixing step becomes lossless, and the IMM
// recursion is exactly the hidden-Markov filter the enumeration computes —
// so the two must agree to machine precision. With r > 0 the IMM is a real
// approximation and the agreement is only loose; both regimes are exercised.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "junction/imm.hpp"

namespace imm_oracle {

struct ScalarProblem {
  std::array<double, 2> t;   // per-mode transition
  std::array<double, 2> q;   // per-mode process variance
  double r = 0.0;            // measurement variance
  double x0 = 0.0;           // common prior mean
  double p0 = 1.0;           // common prior variance
  std::array<double, 2> mu0{0.5, 0.5};
  std::array<std::array<double, 2>, 2> sw{{{0.9, 0.1}, {0.1, 0.9}}};  // sw[i][j]
};

// The benchmark configuration where IMM and exhaustive Bayes agree exactly.
inline ScalarProblem exact_problem() {
  ScalarProblem p;
  p.t = {1.0, 1.08};
  p.q = {0.04, 0.09};
  p.r = 0.0;
  p.x0 = 5.0;
  p.p0 = 1.0;
  p.mu0 = {0.6, 0.4};
  p.sw = {{{0.85, 0.15}, {0.30, 0.70}}};
  return p;
}

inline std::vector<double> exact_problem_measurements() { return {5.35, 5.80, 6.30}; }

inline double gaussian_density(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * junction::kPi * var);
}

// P(mode_k | z_1..z_k) for k = 1..n by enumerating all 2^k mode sequences,
// each carrying its own scalar Kalman filter. Completely independent of the
// library implementation.
inline std::vector<std::array<double, 2>> exhaustive_mode_posteriors(
    const ScalarProblem& pr, const std::vector<double>& zs) {
  std::vector<std::array<double, 2>> out;
  const int n = static_cast<int>(zs.size());
  for (int k = 1; k <= n; ++k) {
    std::array<double, 2> post{0.0, 0.0};
    for (int bits = 0; bits < (1 << k); ++bits) {
      double w = 0.0;
      // Mode prior for the first step: one switching transition from mu0.
      const int m0 = bits & 1;
      for (int i = 0; i < 2; ++i) {
        w += pr.mu0[static_cast<std::size_t>(i)] *
             pr.sw[static_cast<std::size_t>(i)][static_cast<std::size_t>(m0)];
      }
      double mean = pr.x0;
      double var = pr.p0;
      int prev = m0;
      for (int step = 0; step < k; ++step) {
        const int mode = (bits >> step) & 1;
        if (step > 0) {
          w *= pr.sw[static_cast<std::size_t>(prev)][static_cast<std::size_t>(mode)];
        }
        const auto mu = static_cast<std::size_t>(mode);
        mean = pr.t[mu] * mean;
        var = pr.t[mu] * pr.t[mu] * var + pr.q[mu];
        const double s = var + pr.r;
        w *= gaussian_density(zs[static_cast<std::size_t>(step)], mean, s);
        const double gain = var / s;
        mean += gain * (zs[static_cast<std::size_t>(step)] - mean);
        var *= (1.0 - gain);
        prev = mode;
      }
      post[static_cast<std::size_t>((bits >> (k - 1)) & 1)] += w;
    }
    const double total = post[0] + post[1];
    out.push_back({post[0] / total, post[1] / total});
  }
  return out;
}

// The library's IMM run on the same scalar problem via 1x1 matrices.
inline std::vector<std::array<double, 2>> imm_mode_posteriors(const ScalarProblem& pr,
                                                              const std::vector<double>& zs) {
  using junction::DynamicsModel;
  using junction::GaussianEstimate;
  using junction::ImmComponents;
  using junction::ModelMatrix;
  using junction::ModelVector;

  std::array<DynamicsModel, 2> dyn;
  for (int j = 0; j < 2; ++j) {
    ModelMatrix t(1, 1);
    t << pr.t[static_cast<std::size_t>(j)];
    ModelMatrix q(1, 1);
    q << pr.q[static_cast<std::size_t>(j)];
    dyn[static_cast<std::size_t>(j)] = DynamicsModel::from_matrices(t, q);
  }
  junction::BehaviorSwitchMatrix sw;
  sw.p = pr.sw;
  std::array<Eigen::MatrixXd, 2> h;
  h[0] = Eigen::MatrixXd::Ones(1, 1);
  h[1] = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd r(1, 1);
  r << pr.r;

  ImmComponents comp;
  for (int j = 0; j < 2; ++j) {
    GaussianEstimate e;
    e.mean = ModelVector::Constant(1, pr.x0);
    e.cov = ModelMatrix::Constant(1, 1, pr.p0);
    comp.est[static_cast<std::size_t>(j)] = e;
  }
  comp.mu = pr.mu0;

  std::vector<std::array<double, 2>> out;
  for (double z : zs) {
    Eigen::VectorXd vz(1);
    vz << z;
    comp = junction::imm_core(comp, sw, {&dyn[0], &dyn[1]}, vz, h, r,
                              /*theta=*/0.0);
    out.push_back(comp.mu);
  }
  return out;
}

inline double max_posterior_gap(const std::vector<std::array<double, 2>>& a,
                                const std::vector<std::array<double, 2>>& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    gap = std::max(gap, std::abs(a[k][0] - b[k][0]));
    gap = std::max(gap, std::abs(a[k][1] - b[k][1]));
  }
  return gap;
}

}  // namespace imm_oracle
