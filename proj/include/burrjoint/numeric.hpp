#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "burrjoint/error.hpp"

namespace burrjoint::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// log(1 + e^x) without overflow or loss of precision for large |x|.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// 1 / (1 + e^-x).
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + x^beta) for x >= 0.
inline double log1p_pow(double x, double beta) {
  if (x == 0.0) return 0.0;
  return softplus(beta * std::log(x));
}

inline double log_sum_exp(std::span<const double> values) {
  double mx = -kInf;
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Upper critical value of the chi-square distribution with `dof` degrees of
/// freedom, P(X > c) = alpha, via the inverse regularized incomplete gamma.
inline double chi2_critical(double alpha, double dof = 1.0) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "alpha must lie in (0,1)");
  return 2.0 * boost::math::gamma_q_inv(0.5 * dof, alpha);
}

/// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // Jacobi-transformed series converges fast for small x.
    const double c = M_PI * M_PI / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 50; k += 2) {
      const double term = std::exp(-static_cast<double>(k * k) * c);
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * M_PI) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Root of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double find_root(F&& f, double lo, double hi, double flo, double fhi, int bits = 50) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require((flo < 0.0) != (fhi < 0.0), ErrorKind::NumericalFailure, "root is not bracketed");
  std::uintmax_t iters = 300;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                  boost::math::tools::eps_tolerance<double>(bits), iters);
  require(iters < 300, ErrorKind::NumericalFailure, "root finder did not converge");
  return 0.5 * (a + b);
}

template <class F>
double find_root(F&& f, double lo, double hi, int bits = 50) {
  return find_root(f, lo, hi, f(lo), f(hi), bits);
}

/// Minimum of a unimodal f on [lo, hi]; returns {argmin, min}.
template <class F>
std::pair<double, double> find_minimum(F&& f, double lo, double hi, int bits = 40) {
  std::uintmax_t iters = 500;
  return boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
}

template <std::size_t K>
struct QuadratureResult {
  std::array<double, K> value{};
  std::array<double, K> error{};
  bool converged = false;
  int intervals = 0;
};

/// Globally adaptive N-point Gauss-Kronrod quadrature of a vector-valued
/// integrand f: double -> std::array<double, K> on a finite interval, using
/// Boost's nodes and weights. Each component must meet
/// max(abs_tol, rel_tol |I_k|).
template <unsigned N, std::size_t K, class F>
QuadratureResult<K> integrate_gk(F&& f, double a, double b, double abs_tol, double rel_tol, int max_intervals = 400) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, N>;
  using Gauss = boost::math::quadrature::gauss<double, (N - 1) / 2>;
  constexpr bool gauss_has_center = ((N - 1) / 2) % 2 == 1;
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();

  struct Panel {
    double a, b;
    std::array<double, K> value, error;
  };

  auto eval = [&](double lo, double hi) {
    Panel p{lo, hi, {}, {}};
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    std::array<double, K> kr{}, gs{};
    const auto f0 = f(c);
    for (std::size_t k = 0; k < K; ++k) {
      kr[k] = f0[k] * wk[0];
      if (gauss_has_center) gs[k] = f0[k] * wg[0];
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      const auto fp = f(c + h * x[i]);
      const auto fm = f(c - h * x[i]);
      const bool is_gauss = gauss_has_center ? (i % 2 == 0) : (i % 2 == 1);
      for (std::size_t k = 0; k < K; ++k) {
        const double s = fp[k] + fm[k];
        kr[k] += s * wk[i];
        if (is_gauss) gs[k] += s * wg[i / 2];
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      p.value[k] = kr[k] * h;
      p.error[k] = std::abs((kr[k] - gs[k]) * h);
    }
    return p;
  };

  std::vector<Panel> panels;
  panels.push_back(eval(a, b));
  QuadratureResult<K> out;
  for (;;) {
    std::array<double, K> total{}, err{};
    for (const auto& p : panels)
      for (std::size_t k = 0; k < K; ++k) {
        total[k] += p.value[k];
        err[k] += p.error[k];
      }
    bool ok = true;
    bool finite = true;
    std::array<double, K> target{};
    for (std::size_t k = 0; k < K; ++k) {
      target[k] = std::max(abs_tol, rel_tol * std::abs(total[k]));
      if (!std::isfinite(total[k])) finite = false;
      if (err[k] > target[k]) ok = false;
    }
    if (!finite || ok || static_cast<int>(panels.size()) >= max_intervals) {
      out.value = total;
      out.error = err;
      out.converged = ok && finite;
      out.intervals = static_cast<int>(panels.size());
      return out;
    }
    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      double score = 0.0;
      for (std::size_t k = 0; k < K; ++k) score = std::max(score, panels[i].error[k] / target[k]);
      if (score > worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    const Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    panels[worst] = eval(p.a, mid);
    panels.push_back(eval(mid, p.b));
  }
}

template <std::size_t K, class F>
QuadratureResult<K> integrate_gk61(F&& f, double a, double b, double abs_tol, double rel_tol, int max_intervals = 400) {
  return integrate_gk<61, K>(f, a, b, abs_tol, rel_tol, max_intervals);
}

/// Scalar convenience wrapper.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10,
                 bool* converged = nullptr) {
  auto r = integrate_gk61<1>([&](double t) { return std::array<double, 1>{f(t)}; }, a, b, abs_tol,
                             rel_tol);
  if (converged) *converged = r.converged;
  return r.value[0];
}

}  // namespace burrjoint::numeric
