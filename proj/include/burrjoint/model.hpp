#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burrjoint/error.hpp"
#include "burrjoint/numeric.hpp"
#include "burrjoint/random.hpp"

namespace burrjoint {

/// Burr-XII shape pair: f(x) = alpha beta x^(beta-1) (1+x^beta)^-(alpha+1), x > 0.
struct BurrParams {
  double alpha = 1.0;
  double beta = 1.0;

  bool valid() const { return std::isfinite(alpha) && std::isfinite(beta) && alpha > 0.0 && beta > 0.0; }
};

inline void validate(const BurrParams& p) {
  require(p.valid(), ErrorKind::InvalidParameter,
          "Burr-XII shapes must be finite and positive (alpha=" + std::to_string(p.alpha) +
              ", beta=" + std::to_string(p.beta) + ")");
}

/// log(1 + x^beta).
inline double burr_log1p_pow(const BurrParams& p, double x) { return numeric::log1p_pow(x, p.beta); }

inline double log_sf(const BurrParams& p, double x) {
  validate(p);
  if (x <= 0.0) return 0.0;
  return -p.alpha * numeric::log1p_pow(x, p.beta);
}

inline double sf(const BurrParams& p, double x) { return std::exp(log_sf(p, x)); }

inline double cdf(const BurrParams& p, double x) { return -std::expm1(log_sf(p, x)); }

inline double log_pdf(const BurrParams& p, double x) {
  validate(p);
  if (x < 0.0) return -numeric::kInf;
  if (x == 0.0) {
    if (p.beta < 1.0) return numeric::kInf;
    if (p.beta == 1.0) return std::log(p.alpha);
    return -numeric::kInf;
  }
  const double lx = std::log(x);
  return std::log(p.alpha) + std::log(p.beta) + (p.beta - 1.0) * lx -
         (p.alpha + 1.0) * numeric::softplus(p.beta * lx);
}

inline double pdf(const BurrParams& p, double x) { return std::exp(log_pdf(p, x)); }

/// Hazard f/F̄ = alpha beta x^(beta-1) / (1 + x^beta).
inline double hazard(const BurrParams& p, double x) {
  validate(p);
  if (x <= 0.0) return p.beta < 1.0 ? numeric::kInf : (p.beta == 1.0 ? p.alpha : 0.0);
  const double lx = std::log(x);
  return p.alpha * p.beta * std::exp((p.beta - 1.0) * lx) * numeric::logistic(-p.beta * lx);
}

/// Inverse cdf: ((1-u)^(-1/alpha) - 1)^(1/beta).
inline double quantile(const BurrParams& p, double u) {
  validate(p);
  require(u >= 0.0 && u < 1.0, ErrorKind::InvalidParameter, "quantile level must lie in [0,1)");
  if (u == 0.0) return 0.0;
  const double t = std::expm1(-std::log1p(-u) / p.alpha);
  return std::exp(std::log(t) / p.beta);
}

/// Point with survival s, i.e. quantile(1 - s), accurate for tiny s.
inline double survival_inverse(const BurrParams& p, double s) {
  validate(p);
  require(s > 0.0 && s <= 1.0, ErrorKind::InvalidParameter, "survival level must lie in (0,1]");
  if (s == 1.0) return 0.0;
  const double t = std::expm1(-std::log(s) / p.alpha);
  return std::exp(std::log(t) / p.beta);
}

/// Draws by inverse transform from open-interval uniforms.
inline std::vector<double> sample(const BurrParams& p, std::size_t count, Rng& rng) {
  validate(p);
  std::vector<double> out(count);
  for (auto& x : out) x = survival_inverse(p, uniform_open(rng));
  return out;
}

struct KsResult {
  double distance = 0.0;
  /// Unavailable below the sample size where the asymptotic law is usable.
  std::optional<double> p_value;
};

inline constexpr std::size_t kKsMinSampleSize = 8;

/// One-sample Kolmogorov-Smirnov test against a Burr-XII law. The p-value uses
/// the asymptotic Kolmogorov law with Stephens' small-sample scaling
/// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline KsResult ks_test(std::span<const double> data, const BurrParams& p) {
  validate(p);
  require(!data.empty(), ErrorKind::InvalidSample, "K-S test needs at least one observation");
  std::vector<double> x(data.begin(), data.end());
  for (double v : x)
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidSample, "observations must be positive");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(p, x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult out;
  out.distance = d;
  if (x.size() >= kKsMinSampleSize) {
    const double sn = std::sqrt(n);
    out.p_value = numeric::kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  }
  return out;
}

}  // namespace burrjoint
