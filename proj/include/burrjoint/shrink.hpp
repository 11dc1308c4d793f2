#pragma once

#include <array>
#include <cmath>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/numeric.hpp"

namespace burrjoint {

struct ShrinkConfig {
  double w = 0.5;       // confidence in the prior guess
  ThetaVector theta0;   // prior guess
  double alpha = 0.05;  // pretest size

  void validate() const {
    require(w >= 0.0 && w <= 1.0, ErrorKind::InvalidParameter, "shrinkage weight must lie in [0,1]");
    require(theta0.valid(), ErrorKind::InvalidParameter, "prior guess must be positive");
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "pretest size must lie in (0,1)");
  }

  double critical_value() const { return numeric::chi2_critical(alpha, 1.0); }
};

/// w theta0 + (1 - w) theta_hat, evaluated as theta_hat - w (theta_hat - theta0).
inline double linear_shrink(double theta_hat, double theta0, double w) {
  return theta_hat - w * (theta_hat - theta0);
}

inline ThetaVector linear_shrink(const ThetaVector& theta_hat, const ShrinkConfig& cfg) {
  cfg.validate();
  ThetaVector out;
  for (int i = 0; i < 4; ++i) out[i] = linear_shrink(theta_hat[i], cfg.theta0[i], cfg.w);
  return out;
}

/// Pretest statistic r (theta_hat - theta0)^2 / var.
inline double pretest_statistic(double theta_hat, double theta0, double variance, int r) {
  require(variance > 0.0 && std::isfinite(variance), ErrorKind::InvalidParameter, "pretest variance must be positive");
  const double d = theta_hat - theta0;
  return r * d * d / variance;
}

struct PretestResult {
  ThetaVector theta;
  std::array<double, 4> statistic{};
  std::array<bool, 4> shrunk{};  // hypothesis theta = theta0 retained
};

/// Shrinkage pretest estimator: theta_hat - w (theta_hat - theta0) I(l < c).
inline PretestResult shrink_pretest(const ThetaVector& theta_hat, const std::array<double, 4>& variance, int r,
                                    const ShrinkConfig& cfg) {
  cfg.validate();
  const double crit = cfg.critical_value();
  PretestResult out;
  for (int i = 0; i < 4; ++i) {
    out.statistic[i] = pretest_statistic(theta_hat[i], cfg.theta0[i], variance[i], r);
    out.shrunk[i] = out.statistic[i] < crit;
    const double step = out.shrunk[i] ? cfg.w * (theta_hat[i] - cfg.theta0[i]) : 0.0;
    out.theta[i] = theta_hat[i] - step;
  }
  return out;
}

/// Same estimator written through the linear shrinkage estimate:
/// theta_hat - (theta_hat - theta_LS) I(l < c).
inline PretestResult shrink_pretest_via_linear(const ThetaVector& theta_hat, const std::array<double, 4>& variance,
                                               int r, const ShrinkConfig& cfg) {
  const ThetaVector ls = linear_shrink(theta_hat, cfg);
  const double crit = cfg.critical_value();
  PretestResult out;
  for (int i = 0; i < 4; ++i) {
    out.statistic[i] = pretest_statistic(theta_hat[i], cfg.theta0[i], variance[i], r);
    out.shrunk[i] = out.statistic[i] < crit;
    out.theta[i] = out.shrunk[i] ? ls[i] : theta_hat[i];
  }
  return out;
}

}  // namespace burrjoint
