#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/model.hpp"
#include "burrjoint/numeric.hpp"

namespace burrjoint {

using InfoMatrix = Eigen::Matrix4d;

struct MleOptions {
  double tol = 1e-8;      // sup-norm of the gradient in log-parameter space
  int max_iter = 500;
  bool allow_partial = false;  // fit the identified pair when the other has no failures
  std::optional<ThetaVector> init;
};

struct MleFit {
  ThetaVector theta;
  double loglik = 0.0;
  InfoMatrix information = InfoMatrix::Zero();
  bool information_regular = false;
  bool converged = false;
  int iterations = 0;
  std::array<bool, 2> identified{true, true};
};

struct PairFit {
  BurrParams params;
  double loglik = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
};

namespace detail {

/// Profile maximizer of alpha with beta fixed at 1.
inline BurrParams default_pair_init(const PopulationData& d) {
  double denom = 0.0;
  for (double lw : d.log_w) denom += numeric::softplus(lw);
  if (d.censored > 0) denom += d.censored * numeric::softplus(d.log_w_r);
  const double alpha = denom > 0.0 ? d.observed() / denom : 1.0;
  return {alpha > 0.0 && std::isfinite(alpha) ? alpha : 1.0, 1.0};
}

/// Maximizes one population's log-likelihood over (log alpha, log beta) with
/// BFGS and an Armijo backtracking search, then polishes with Newton steps on
/// a differenced gradient if the line search stalls.
inline PairFit fit_pair(const PopulationData& d, BurrParams init, double tol, int max_iter) {
  using Vec = Eigen::Vector2d;
  using Mat = Eigen::Matrix2d;
  require(d.observed() > 0, ErrorKind::Unidentifiable, "population has no observed failures");
  auto value = [&](const Vec& phi) { return -population_loglik(d, std::exp(phi[0]), std::exp(phi[1])); };
  auto gradient = [&](const Vec& phi) {
    const auto g = population_grad_log(d, std::exp(phi[0]), std::exp(phi[1]));
    return Vec(-g[0], -g[1]);
  };
  constexpr double kBound = 40.0;

  Vec phi(std::log(init.alpha), std::log(init.beta));
  double f = value(phi);
  Vec g = gradient(phi);
  require(std::isfinite(f) && g.allFinite(), ErrorKind::NonConvergence, "log-likelihood is not finite at the starting point");
  Mat h = Mat::Identity();
  int it = 0;
  bool stalled = false;
  for (; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < tol) break;
    Vec p = -h * g;
    if (g.dot(p) >= 0.0) {
      h = Mat::Identity();
      p = -g;
    }
    const double pmax = p.lpNorm<Eigen::Infinity>();
    if (pmax > 2.0) p *= 2.0 / pmax;
    double t = 1.0;
    Vec next;
    double fn = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      next = phi + t * p;
      fn = value(next);
      if (std::isfinite(fn) && fn <= f + 1e-4 * t * g.dot(p)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    const Vec gn = gradient(next);
    const Vec s = next - phi;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      if (it == 0) h = Mat::Identity() * (sy / y.dot(y));
      const double rho = 1.0 / sy;
      const Mat i_rsy = Mat::Identity() - rho * s * y.transpose();
      h = i_rsy * h * i_rsy.transpose() + rho * s * s.transpose();
    }
    phi = next;
    f = fn;
    g = gn;
    require(phi.lpNorm<Eigen::Infinity>() < kBound, ErrorKind::NonConvergence,
            "maximizer drifts to the parameter boundary");
  }
  if (stalled || g.lpNorm<Eigen::Infinity>() >= tol) {
    for (int k = 0; k < 30 && g.lpNorm<Eigen::Infinity>() >= tol; ++k, ++it) {
      Mat hess;
      for (int j = 0; j < 2; ++j) {
        const double step = 1e-5;
        Vec up = phi, dn = phi;
        up[j] += step;
        dn[j] -= step;
        hess.col(j) = (gradient(up) - gradient(dn)) / (2.0 * step);
      }
      hess = 0.5 * (hess + hess.transpose()).eval();
      Eigen::LLT<Mat> llt(hess);
      if (llt.info() != Eigen::Success) break;
      Vec p = -llt.solve(g);
      double t = 1.0;
      bool improved = false;
      for (int q = 0; q < 30; ++q, t *= 0.5) {
        const Vec next = phi + t * p;
        const Vec gn = gradient(next);
        if (gn.allFinite() && gn.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
          phi = next;
          g = gn;
          f = value(phi);
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
  }
  const double gnorm = g.lpNorm<Eigen::Infinity>();
  require(gnorm < tol, ErrorKind::NonConvergence,
          "gradient norm " + std::to_string(gnorm) + " above tolerance after " + std::to_string(it) + " iterations");
  return {{std::exp(phi[0]), std::exp(phi[1])}, -f, it, gnorm};
}

}  // namespace detail

/// Starting point: beta = 1 and the profile maximizer of alpha, per population.
inline ThetaVector default_init(const JointSample& sample) {
  return ThetaVector(detail::default_pair_init(sample.population(Population::X)),
                     detail::default_pair_init(sample.population(Population::Y)));
}

/// Negative Hessian of the log-likelihood in theta by central differences,
/// step max(1e-5 |theta_i|, 1e-8), symmetrized.
inline InfoMatrix observed_information(const ThetaVector& theta, const JointSample& sample) {
  validate(theta);
  std::array<double, 4> h{};
  for (int i = 0; i < 4; ++i) h[i] = std::max(1e-5 * std::abs(theta[i]), 1e-8);
  auto ll = [&](const ThetaVector& t) { return log_likelihood(t, sample); };
  auto shifted = [&](int i, double di, int j, double dj) {
    ThetaVector t = theta;
    t[i] += di * h[i];
    if (j >= 0) t[j] += dj * h[j];
    return ll(t);
  };
  const double f0 = ll(theta);
  InfoMatrix info;
  for (int i = 0; i < 4; ++i) {
    info(i, i) = -(shifted(i, 1, -1, 0) - 2.0 * f0 + shifted(i, -1, -1, 0)) / (h[i] * h[i]);
    for (int j = i + 1; j < 4; ++j) {
      const double d = (shifted(i, 1, j, 1) - shifted(i, 1, j, -1) - shifted(i, -1, j, 1) + shifted(i, -1, j, -1)) /
                       (4.0 * h[i] * h[j]);
      info(i, j) = -d;
      info(j, i) = -d;
    }
  }
  return info;
}

inline bool is_regular(const InfoMatrix& info) {
  if (!info.allFinite()) return false;
  for (int i = 0; i < 4; ++i)
    if (info(i, i) <= 0.0) return false;
  Eigen::LLT<InfoMatrix> llt(info);
  return llt.info() == Eigen::Success;
}

/// Maximum-likelihood fit of all four shapes under joint type-II censoring.
inline MleFit fit_mle(const JointSample& sample, const MleOptions& opt = {}) {
  require(opt.tol > 0.0 && opt.max_iter > 0, ErrorKind::InvalidParameter, "tolerance and iteration cap must be positive");
  const ThetaVector init = opt.init.value_or(default_init(sample));
  validate(init);
  MleFit out;
  ThetaVector theta = init;
  double loglik = 0.0;
  for (int pop = 0; pop < 2; ++pop) {
    const auto data = sample.population(pop == 0 ? Population::X : Population::Y);
    if (data.observed() == 0) {
      require(opt.allow_partial, ErrorKind::Unidentifiable,
              std::string(pop == 0 ? "X" : "Y") + " has no observed failures; its shapes are not identified");
      out.identified[pop] = false;
      theta[2 * pop] = numeric::kNaN;
      theta[2 * pop + 1] = numeric::kNaN;
      continue;
    }
    const BurrParams start{init[2 * pop], init[2 * pop + 1]};
    const PairFit pf = detail::fit_pair(data, start, opt.tol, opt.max_iter);
    theta[2 * pop] = pf.params.alpha;
    theta[2 * pop + 1] = pf.params.beta;
    loglik += pf.loglik;
    out.iterations = std::max(out.iterations, pf.iterations);
  }
  out.theta = theta;
  out.loglik = loglik;
  out.converged = true;
  if (out.identified[0] && out.identified[1]) {
    out.information = observed_information(theta, sample);
    out.information_regular = is_regular(out.information);
  } else {
    out.information.setConstant(numeric::kNaN);
  }
  return out;
}

/// Maximum-likelihood fit of a single complete Burr-XII sample.
inline PairFit fit_complete(std::span<const double> data, double tol = 1e-8, int max_iter = 500) {
  require(!data.empty(), ErrorKind::InvalidSample, "empty sample");
  PopulationData d;
  for (double x : data) {
    require(std::isfinite(x) && x > 0.0, ErrorKind::InvalidSample, "observations must be positive");
    d.log_w.push_back(std::log(x));
  }
  d.total = static_cast<int>(data.size());
  return detail::fit_pair(d, detail::default_pair_init(d), tol, max_iter);
}

/// Wald intervals theta_hat +- z sqrt(diag(I^-1)), lower ends truncated at 0.
inline std::array<Interval, 4> aci(const ThetaVector& theta, const InfoMatrix& info, double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::InvalidParameter, "confidence level must lie in (0,1)");
  require(is_regular(info), ErrorKind::SingularInformation, "observed information is not positive definite");
  const InfoMatrix cov = info.inverse();
  const double z = numeric::normal_quantile(0.5 + 0.5 * level);
  std::array<Interval, 4> out;
  for (int i = 0; i < 4; ++i) {
    require(cov(i, i) > 0.0 && std::isfinite(cov(i, i)), ErrorKind::SingularInformation,
            "non-positive variance for theta" + std::to_string(i + 1));
    const double half = z * std::sqrt(cov(i, i));
    out[i] = {std::max(0.0, theta[i] - half), theta[i] + half};
  }
  return out;
}

inline std::array<Interval, 4> aci(const MleFit& fit, double level) {
  require(fit.identified[0] && fit.identified[1], ErrorKind::Unidentifiable, "intervals need all four shapes identified");
  return aci(fit.theta, fit.information, level);
}

/// Diagonal of the inverse information (asymptotic variances).
inline std::array<double, 4> asymptotic_variances(const InfoMatrix& info) {
  require(is_regular(info), ErrorKind::SingularInformation, "observed information is not positive definite");
  const InfoMatrix cov = info.inverse();
  return {cov(0, 0), cov(1, 1), cov(2, 2), cov(3, 3)};
}

}  // namespace burrjoint
