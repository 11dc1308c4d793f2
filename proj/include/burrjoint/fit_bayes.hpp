#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/numeric.hpp"
#include "burrjoint/random.hpp"

namespace burrjoint {

/// Independent gamma priors (shape, rate):
/// theta1 ~ G(a1, b1), theta2 ~ G(c1, d1), theta3 ~ G(a2, b2), theta4 ~ G(c2, d2).
struct GammaPriors {
  double a1 = 0.0, b1 = 0.0, c1 = 0.0, d1 = 0.0;
  double a2 = 0.0, b2 = 0.0, c2 = 0.0, d2 = 0.0;
  bool informative = false;
  double gamma = 1.0;  // exponent of the quasi prior theta^-gamma

  static GammaPriors make_informative(double a1, double b1, double c1, double d1, double a2, double b2,
                                      double c2, double d2) {
    GammaPriors p{a1, b1, c1, d1, a2, b2, c2, d2, true, 0.0};
    for (double h : {a1, b1, c1, d1, a2, b2, c2, d2})
      require(std::isfinite(h) && h > 0.0, ErrorKind::InvalidParameter, "informative hyperparameters must be positive");
    return p;
  }

  /// Improper prior proportional to prod theta_i^-gamma.
  static GammaPriors quasi(double gamma) {
    require(std::isfinite(gamma), ErrorKind::InvalidParameter, "quasi-prior exponent must be finite");
    const double shape = 1.0 - gamma;
    return {shape, 0.0, shape, 0.0, shape, 0.0, shape, 0.0, false, gamma};
  }

  std::string label() const { return informative ? "IN" : "NIN"; }
};

struct DerivedRates {
  double l1 = 0.0, r1 = 0.0, l2 = 0.0, r2 = 0.0;
};

/// Rates of the gamma proposals: theta2 ~ G(m_r + c1, L1), theta1 | theta2 ~ G(m_r + a1, R1)
/// and the Y analogues.
inline DerivedRates derived_rates(const JointSample& sample, const GammaPriors& pr, double theta2, double theta4) {
  DerivedRates out{pr.d1, pr.b1, pr.d2, pr.b2};
  const double lwr = std::log(sample.w_r());
  for (int i = 0; i < sample.r(); ++i) {
    const double lw = std::log(sample.w()[i]);
    if (sample.s()[i] == 1) {
      out.l1 -= lw;
      out.r1 += numeric::softplus(theta2 * lw);
    } else {
      out.l2 -= lw;
      out.r2 += numeric::softplus(theta4 * lw);
    }
  }
  out.r1 += (sample.m() - sample.m_r()) * numeric::softplus(theta2 * lwr);
  out.r2 += (sample.n() - sample.n_r()) * numeric::softplus(theta4 * lwr);
  return out;
}

/// Importance-weighted posterior sample.
struct WeightedDraws {
  std::vector<ThetaVector> theta;
  std::vector<double> log_weight;  // unnormalized
  std::vector<double> weight;      // normalized, sums to 1
  double ess = 0.0;
  bool degenerate = false;  // ess below 1% of the draw count

  std::size_t size() const { return theta.size(); }
};

inline void normalize_weights(WeightedDraws& d) {
  require(!d.log_weight.empty(), ErrorKind::DegenerateWeights, "no draws");
  const double lse = numeric::log_sum_exp(d.log_weight);
  require(std::isfinite(lse), ErrorKind::DegenerateWeights, "importance weights are not finite");
  d.weight.resize(d.log_weight.size());
  double sq = 0.0;
  for (std::size_t j = 0; j < d.weight.size(); ++j) {
    d.weight[j] = std::exp(d.log_weight[j] - lse);
    sq += d.weight[j] * d.weight[j];
  }
  d.ess = 1.0 / sq;
  d.degenerate = d.ess < 0.01 * static_cast<double>(d.weight.size());
}

/// Draws D samples from the gamma proposal and weights them by the
/// leftover likelihood factor.
inline WeightedDraws importance_sample(const JointSample& sample, const GammaPriors& pr, std::size_t draws, Rng& rng) {
  require(draws >= 1, ErrorKind::InvalidParameter, "draw count must be positive");
  const double mr = sample.m_r(), nr = sample.n_r();
  const double shape2 = mr + pr.c1, shape1 = mr + pr.a1, shape4 = nr + pr.c2, shape3 = nr + pr.a2;
  require(shape1 > 0.0 && shape2 > 0.0 && shape3 > 0.0 && shape4 > 0.0, ErrorKind::ImproperProposal,
          "proposal gamma shape is not positive; too few failures for this prior");
  const DerivedRates base = derived_rates(sample, pr, 1.0, 1.0);
  require(base.l1 > 0.0, ErrorKind::ImproperProposal, "proposal rate L1 is not positive");
  require(base.l2 > 0.0, ErrorKind::ImproperProposal, "proposal rate L2 is not positive");

  std::vector<double> lw_x, lw_y;
  for (int i = 0; i < sample.r(); ++i) (sample.s()[i] ? lw_x : lw_y).push_back(std::log(sample.w()[i]));
  const double lwr = std::log(sample.w_r());
  const double cx = sample.m() - sample.m_r(), cy = sample.n() - sample.n_r();

  WeightedDraws out;
  out.theta.resize(draws);
  out.log_weight.resize(draws);
  for (std::size_t j = 0; j < draws; ++j) {
    const double t2 = gamma_draw(rng, shape2, base.l1);
    double sx = 0.0;
    for (double lw : lw_x) sx += numeric::softplus(t2 * lw);
    const double r1 = pr.b1 + sx + cx * numeric::softplus(t2 * lwr);
    require(r1 > 0.0, ErrorKind::ImproperProposal, "proposal rate R1 is not positive");
    const double t1 = gamma_draw(rng, shape1, r1);
    const double t4 = gamma_draw(rng, shape4, base.l2);
    double sy = 0.0;
    for (double lw : lw_y) sy += numeric::softplus(t4 * lw);
    const double r2 = pr.b2 + sy + cy * numeric::softplus(t4 * lwr);
    require(r2 > 0.0, ErrorKind::ImproperProposal, "proposal rate R2 is not positive");
    const double t3 = gamma_draw(rng, shape3, r2);
    out.theta[j] = ThetaVector(t1, t2, t3, t4);
    out.log_weight[j] = -sx - sy - shape1 * std::log(r1) - shape3 * std::log(r2);
  }
  normalize_weights(out);
  return out;
}

enum class LossKind { SquaredError, Linex, GeneralEntropy };

struct Loss {
  LossKind kind = LossKind::SquaredError;
  double param = 0.0;  // v for LINEX, k for GE

  static Loss se() { return {}; }
  static Loss linex(double v) {
    require(std::isfinite(v) && v != 0.0, ErrorKind::InvalidParameter, "LINEX shape v must be non-zero");
    return {LossKind::Linex, v};
  }
  static Loss ge(double k) {
    require(std::isfinite(k) && k != 0.0, ErrorKind::InvalidParameter, "GE shape k must be non-zero");
    return {LossKind::GeneralEntropy, k};
  }

  std::string label() const {
    char buf[64];
    switch (kind) {
      case LossKind::SquaredError: return "se";
      case LossKind::Linex: std::snprintf(buf, sizeof buf, "linex:v=%g", param); return buf;
      case LossKind::GeneralEntropy: std::snprintf(buf, sizeof buf, "ge:k=%g", param); return buf;
    }
    return "?";
  }

  bool operator==(const Loss&) const = default;
};

/// Parses "se", "linex:v=0.5", "ge:k=-0.25".
inline Loss parse_loss(const std::string& text) {
  auto value_after = [&](const std::string& prefix) {
    const std::string rest = text.substr(prefix.size());
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "cannot parse loss '" + text + "'");
    }
    require(used == rest.size(), ErrorKind::Config, "cannot parse loss '" + text + "'");
    return v;
  };
  if (text == "se") return Loss::se();
  if (text.rfind("linex:v=", 0) == 0) return Loss::linex(value_after("linex:v="));
  if (text.rfind("ge:k=", 0) == 0) return Loss::ge(value_after("ge:k="));
  fail(ErrorKind::Config, "unknown loss '" + text + "' (expected se, linex:v=<v> or ge:k=<k>)");
}

/// Bayes estimate of coordinate `coord` under `loss`, in log space where needed.
inline double estimate(const WeightedDraws& d, int coord, const Loss& loss) {
  require(coord >= 0 && coord < 4, ErrorKind::InvalidParameter, "coordinate out of range");
  require(d.ess >= 2.0, ErrorKind::DegenerateWeights, "effective sample size below 2");
  const std::size_t n = d.size();
  switch (loss.kind) {
    case LossKind::SquaredError: {
      numeric::CompensatedSum s;
      for (std::size_t j = 0; j < n; ++j) s.add(d.weight[j] * d.theta[j][coord]);
      return s.value();
    }
    case LossKind::Linex: {
      std::vector<double> terms(n);
      for (std::size_t j = 0; j < n; ++j) terms[j] = d.log_weight[j] - loss.param * d.theta[j][coord];
      const double lse = numeric::log_sum_exp(terms) - numeric::log_sum_exp(d.log_weight);
      return -lse / loss.param;
    }
    case LossKind::GeneralEntropy: {
      std::vector<double> terms(n);
      for (std::size_t j = 0; j < n; ++j) terms[j] = d.log_weight[j] - loss.param * std::log(d.theta[j][coord]);
      const double lse = numeric::log_sum_exp(terms) - numeric::log_sum_exp(d.log_weight);
      return std::exp(-lse / loss.param);
    }
  }
  return numeric::kNaN;
}

inline ThetaVector estimate(const WeightedDraws& d, const Loss& loss) {
  ThetaVector t;
  for (int i = 0; i < 4; ++i) t[i] = estimate(d, i, loss);
  return t;
}

inline double posterior_variance(const WeightedDraws& d, int coord) {
  const double mean = estimate(d, coord, Loss::se());
  numeric::CompensatedSum s;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double e = d.theta[j][coord] - mean;
    s.add(d.weight[j] * e * e);
  }
  return s.value();
}

namespace detail {

struct SortedMarginal {
  std::vector<double> value;
  std::vector<double> cum;  // cum[i] = weight of value[0..i]
};

inline SortedMarginal sorted_marginal(const WeightedDraws& d, int coord) {
  require(coord >= 0 && coord < 4, ErrorKind::InvalidParameter, "coordinate out of range");
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d.theta[a][coord] < d.theta[b][coord]; });
  SortedMarginal m;
  m.value.reserve(idx.size());
  m.cum.reserve(idx.size());
  double acc = 0.0;
  for (std::size_t i : idx) {
    acc += d.weight[i];
    m.value.push_back(d.theta[i][coord]);
    m.cum.push_back(acc);
  }
  const double total = acc;
  for (double& c : m.cum) c /= total;
  return m;
}

inline void require_level(double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::InvalidParameter, "level must lie in (0,1)");
}

}  // namespace detail

/// Equal-tail interval from weighted quantiles: smallest draws whose
/// cumulative weight reaches alpha/2 and 1 - alpha/2. Low effective sample
/// sizes are reported through WeightedDraws::ess, not rejected.
inline Interval credible_interval(const WeightedDraws& d, int coord, double level) {
  detail::require_level(level);
  const auto m = detail::sorted_marginal(d, coord);
  const double a = 0.5 * (1.0 - level);
  auto quantile_at = [&](double p) {
    const auto it = std::lower_bound(m.cum.begin(), m.cum.end(), p);
    return m.value[std::min<std::size_t>(it - m.cum.begin(), m.value.size() - 1)];
  };
  return {quantile_at(a), quantile_at(1.0 - a)};
}

/// Shortest interval spanning sorted draws with total weight >= level.
inline Interval hpd_interval(const WeightedDraws& d, int coord, double level) {
  detail::require_level(level);
  const auto m = detail::sorted_marginal(d, coord);
  const std::size_t n = m.value.size();
  Interval best{m.value.front(), m.value.back()};
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double before = i == 0 ? 0.0 : m.cum[i - 1];
    if (j < i) j = i;
    while (j < n && m.cum[j] - before < level) ++j;
    if (j >= n) break;
    if (m.value[j] - m.value[i] < best.length()) best = {m.value[i], m.value[j]};
  }
  return best;
}

}  // namespace burrjoint
