#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/fit_bayes.hpp"
#include "burrjoint/model.hpp"
#include "burrjoint/numeric.hpp"

namespace burrjoint {

/// Predicting the failure time W_{r+j} of the same experiment.
struct PredictionTarget {
  int j = 1;
  /// Largest allowed exponent of the 2^(j-1) intermediate label paths in Case 3.
  int path_cap = 12;
};

/// Above this many intermediate failures the alternating expansion of the
/// Case 1/2 survival is not attempted.
inline constexpr int kMaxExpansionTerms = 30;

namespace detail {

inline double xlogy(double x, double log_y) { return x == 0.0 ? 0.0 : x * log_y; }

/// log(1 - e^lq) for lq <= 0.
inline double log1m_exp(double lq) {
  if (lq >= 0.0) return -numeric::kInf;
  return lq > -M_LN2 ? std::log(-std::expm1(lq)) : std::log1p(-std::exp(lq));
}

/// Geometry of a prediction problem: A X-units and B Y-units still running
/// at w_r, W_{r+j} the j-th of their failures.
struct PredictionShape {
  int a_left = 0;
  int b_left = 0;
  int j = 1;
  double w_r = 0.0;
  double log_w_r = 0.0;
  CensorCase kase = CensorCase::Case3;
  std::vector<double> log_choose_a;  // log C(A, a), a = 0..A
  std::vector<double> log_choose_b;  // log C(B, b), b = 0..B

  int a_min() const { return std::max(0, j - 1 - b_left); }
  int a_max() const { return std::min(j - 1, a_left); }
};

inline PredictionShape make_shape(const JointSample& sample, PredictionTarget target) {
  const int j = target.j;
  PredictionShape s;
  s.kase = classify_case(sample);
  require(s.kase != CensorCase::Case3 || j - 1 <= target.path_cap, ErrorKind::PathExplosion,
          "2^" + std::to_string(j - 1) + " label paths exceed the cap 2^" + std::to_string(target.path_cap));
  s.a_left = sample.m() - sample.m_r();
  s.b_left = sample.n() - sample.n_r();
  require(j >= 1, ErrorKind::InfeasiblePrediction, "prediction index j must be at least 1");
  require(j <= s.a_left + s.b_left, ErrorKind::InfeasiblePrediction,
          "only " + std::to_string(s.a_left + s.b_left) + " units remain; cannot predict W_{r+" + std::to_string(j) + "}");
  s.j = j;
  s.w_r = sample.w_r();
  s.log_w_r = std::log(s.w_r);
  for (int a = 0; a <= s.a_left; ++a) s.log_choose_a.push_back(numeric::log_choose(s.a_left, a));
  for (int b = 0; b <= s.b_left; ++b) s.log_choose_b.push_back(numeric::log_choose(s.b_left, b));
  return s;
}

/// Per-parameter constants: shapes and log(1 + w_r^beta) for each population.
struct DrawTerms {
  double t1, t2, t3, t4;
  double sp_x_wr, sp_y_wr;
  double log_t1t2, log_t3t4;
};

inline DrawTerms make_terms(const ThetaVector& th, const PredictionShape& s) {
  return {th[0], th[1], th[2], th[3],
          numeric::softplus(th[1] * s.log_w_r), numeric::softplus(th[3] * s.log_w_r),
          std::log(th[0]) + std::log(th[1]), std::log(th[2]) + std::log(th[3])};
}

/// Conditional survival q = F̄(xi)/F̄(w_r) and density g = f(xi)/F̄(w_r), in logs.
struct LocalTerms {
  double lq1 = 0.0, lp1 = -numeric::kInf, lg1 = -numeric::kInf;
  double lq2 = 0.0, lp2 = -numeric::kInf, lg2 = -numeric::kInf;
};

inline LocalTerms local_terms(const DrawTerms& d, const PredictionShape& s, double xi, bool with_density) {
  LocalTerms t;
  const double lx = std::log(xi);
  if (s.a_left > 0) {
    const double sp = numeric::softplus(d.t2 * lx);
    t.lq1 = std::min(0.0, -d.t1 * (sp - d.sp_x_wr));
    t.lp1 = log1m_exp(t.lq1);
    if (with_density) t.lg1 = d.log_t1t2 + (d.t2 - 1.0) * lx - (d.t1 + 1.0) * sp + d.t1 * d.sp_x_wr;
  }
  if (s.b_left > 0) {
    const double sp = numeric::softplus(d.t4 * lx);
    t.lq2 = std::min(0.0, -d.t3 * (sp - d.sp_y_wr));
    t.lp2 = log1m_exp(t.lq2);
    if (with_density) t.lg2 = d.log_t3t4 + (d.t4 - 1.0) * lx - (d.t3 + 1.0) * sp + d.t3 * d.sp_y_wr;
  }
  return t;
}

/// Density of W_{r+j} at xi > w_r. Summing over the labels of the j-1
/// intermediate failures, grouped by how many of them are X failures (a).
inline double density(const DrawTerms& d, const PredictionShape& s, double xi) {
  if (!(xi > s.w_r)) return 0.0;
  if (!std::isfinite(xi)) return 0.0;
  const LocalTerms t = local_terms(d, s, xi, true);
  const int A = s.a_left, B = s.b_left;
  double total = 0.0;
  for (int a = s.a_min(); a <= s.a_max(); ++a) {
    const int b = s.j - 1 - a;
    const double base = s.log_choose_a[a] + s.log_choose_b[b] + xlogy(a, t.lp1) + xlogy(b, t.lp2);
    if (A - a >= 1)
      total += std::exp(base + std::log(A - a) + xlogy(A - a - 1, t.lq1) + xlogy(B - b, t.lq2) + t.lg1);
    if (B - b >= 1)
      total += std::exp(base + std::log(B - b) + xlogy(A - a, t.lq1) + xlogy(B - b - 1, t.lq2) + t.lg2);
  }
  return total;
}

/// Alternating expansion for a single remaining population of size `left`:
/// (left!/(left-j)!) sum_i c_i(j-1) q^(left-j+i+1) / (left-j+i+1), with
/// c_i(n) = (-1)^i / (i! (n-i)!). `condition` receives sum |term|.
inline double survival_expansion(int left, int j, double lq, double* condition = nullptr) {
  numeric::CompensatedSum sum;
  double abs_sum = 0.0;
  // Coefficients as plain products: lgamma would cost |lgamma| ulps per term.
  double pref = 1.0;
  for (int k = left - j + 1; k <= left; ++k) pref *= k;
  std::vector<double> fact(static_cast<std::size_t>(j), 1.0);
  for (int k = 1; k < j; ++k) fact[k] = fact[k - 1] * k;
  for (int i = 0; i <= j - 1; ++i) {
    const double e = left - j + i + 1.0;
    const double mag = pref / (fact[i] * fact[j - 1 - i]) * std::exp(e * lq) / e;
    sum.add(i % 2 == 0 ? mag : -mag);
    abs_sum += mag;
  }
  if (condition) *condition = abs_sum;
  return sum.value();
}

/// P(at most j-1 of the remaining units fail by xi).
inline double survival(const DrawTerms& d, const PredictionShape& s, double xi) {
  if (!(xi > s.w_r)) return 1.0;
  if (!std::isfinite(xi)) return 0.0;
  const LocalTerms t = local_terms(d, s, xi, false);
  const int A = s.a_left, B = s.b_left;
  if (B == 0 || A == 0) {
    const int left = A > 0 ? A : B;
    const double lq = A > 0 ? t.lq1 : t.lq2;
    if (s.j - 1 <= kMaxExpansionTerms) {
      double cond = 0.0;
      const double v = survival_expansion(left, s.j, lq, &cond);
      if (cond * 1e-16 < 1e-14) return std::clamp(v, 0.0, 1.0);
    }
    // Binomial tail: P(Bin(left, p) <= j-1) = I_q(left-j+1, j).
    return boost::math::ibeta(left - s.j + 1.0, static_cast<double>(s.j), std::exp(lq));
  }
  double total = 0.0;
  for (int a = 0; a <= std::min(A, s.j - 1); ++a) {
    const double px = std::exp(s.log_choose_a[a] + xlogy(a, t.lp1) + xlogy(A - a, t.lq1));
    double cdf_y = 0.0;
    for (int b = 0; b <= std::min(B, s.j - 1 - a); ++b)
      cdf_y += std::exp(s.log_choose_b[b] + xlogy(b, t.lp2) + xlogy(B - b, t.lq2));
    total += px * std::min(1.0, cdf_y);
  }
  return std::clamp(total, 0.0, 1.0);
}

/// Tail exponent of W_{r+j}: F̄ decays like xi^-kappa.
inline double tail_exponent(const DrawTerms& d, const PredictionShape& s) {
  std::vector<double> e;
  for (int i = 0; i < s.a_left; ++i) e.push_back(d.t1 * d.t2);
  for (int i = 0; i < s.b_left; ++i) e.push_back(d.t3 * d.t4);
  std::sort(e.begin(), e.end());
  const int survivors = s.a_left + s.b_left - s.j + 1;
  double k = 0.0;
  for (int i = 0; i < survivors; ++i) k += e[i];
  return k;
}

inline constexpr std::size_t kMaxMoments = 8;
using MomentArray = std::array<double, kMaxMoments>;

inline double loss_kernel(const Loss& loss, double w) {
  switch (loss.kind) {
    case LossKind::SquaredError: return w;
    case LossKind::Linex: return std::exp(-loss.param * w);
    case LossKind::GeneralEntropy: return std::exp(-loss.param * std::log(w));
  }
  return numeric::kNaN;
}

inline void check_loss_moment(const Loss& loss, double kappa) {
  switch (loss.kind) {
    case LossKind::SquaredError:
      require(kappa > 1.0, ErrorKind::NumericalFailure, "predictive mean does not exist (tail exponent <= 1)");
      break;
    case LossKind::Linex:
      require(loss.param > 0.0, ErrorKind::NumericalFailure,
              "LINEX predictor with v < 0 needs E[exp(|v| W)], which diverges for power-law tails");
      break;
    case LossKind::GeneralEntropy:
      require(loss.param > 0.0 || kappa > -loss.param, ErrorKind::NumericalFailure,
              "GE predictor moment E[W^-k] does not exist for this tail");
      break;
  }
}

/// Largest power of w a kernel grows like in the tail.
inline double kernel_growth(const Loss& loss) {
  if (loss.kind == LossKind::SquaredError) return 1.0;
  if (loss.kind == LossKind::GeneralEntropy && loss.param < 0.0) return -loss.param;
  return 0.0;
}

/// E[kernel_l(W)] for each loss. The half-line (w_r, inf) is mapped to
/// u = 1/(1+w) in (0, 1/(1+w_r)), then u = t^g with g = max(1, 2/(kappa - p)),
/// p the fastest kernel growth, which smooths the algebraic behaviour at u = 0.
/// The density integral is used to renormalize.
inline MomentArray moments(const DrawTerms& d, const PredictionShape& s, const std::vector<Loss>& losses,
                           double abs_tol = 1e-9, double rel_tol = 1e-9) {
  require(losses.size() + 1 <= kMaxMoments, ErrorKind::InvalidParameter, "too many losses in one request");
  const double kappa = tail_exponent(d, s);
  double growth = 0.0;
  for (const auto& l : losses) {
    check_loss_moment(l, kappa);
    growth = std::max(growth, kernel_growth(l));
  }
  const double g = std::min(50.0, std::max(1.0, 2.0 / (kappa - growth)));
  const double u_hi = 1.0 / (1.0 + s.w_r);
  const double t_hi = std::pow(u_hi, 1.0 / g);
  auto integrand = [&](double t) {
    MomentArray out{};
    const double u = std::pow(t, g);
    const double w = 1.0 / u - 1.0;
    // dw = (1/u^2) du, du = g t^(g-1) dt
    const double f = density(d, s, w) * g * u / (t * u * u);
    if (!(f > 0.0) || !std::isfinite(f)) return out;
    out[0] = f;
    for (std::size_t i = 0; i < losses.size(); ++i) out[i + 1] = f * loss_kernel(losses[i], w);
    return out;
  };
  auto q = numeric::integrate_gk61<kMaxMoments>(integrand, 0.0, t_hi, abs_tol, rel_tol, 800);
  require(q.converged, ErrorKind::NumericalFailure, "predictive moment quadrature did not converge");
  require(std::abs(q.value[0] - 1.0) < 1e-6, ErrorKind::NumericalFailure, "predictive density does not integrate to 1");
  MomentArray out{};
  for (std::size_t i = 0; i < losses.size(); ++i) out[i] = q.value[i + 1] / q.value[0];
  return out;
}

inline double point_from_moment(const Loss& loss, double moment) {
  switch (loss.kind) {
    case LossKind::SquaredError: return moment;
    case LossKind::Linex: return -std::log(moment) / loss.param;
    case LossKind::GeneralEntropy: return std::exp(-std::log(moment) / loss.param);
  }
  return numeric::kNaN;
}

}  // namespace detail

/// Conditional density of W_{r+j} given the observed sample.
inline double cond_density(const ThetaVector& theta, const JointSample& sample, PredictionTarget target, double w) {
  validate(theta);
  const auto shape = detail::make_shape(sample, target);
  return detail::density(detail::make_terms(theta, shape), shape, w);
}

/// P(W_{r+j} > xi | data).
inline double pred_survival(const ThetaVector& theta, const JointSample& sample, PredictionTarget target, double xi) {
  validate(theta);
  const auto shape = detail::make_shape(sample, target);
  return detail::survival(detail::make_terms(theta, shape), shape, xi);
}

/// Cross-check route: survival as the integral of the conditional density.
inline double pred_survival_by_quadrature(const ThetaVector& theta, const JointSample& sample,
                                          PredictionTarget target, double xi) {
  validate(theta);
  const auto shape = detail::make_shape(sample, target);
  const auto terms = detail::make_terms(theta, shape);
  if (xi <= shape.w_r) xi = shape.w_r;
  const double u_hi = 1.0 / (1.0 + xi);
  auto f = [&](double u) {
    const double w = 1.0 / u - 1.0;
    return detail::density(terms, shape, w) / (u * u);
  };
  bool ok = false;
  const double v = numeric::integrate(f, 0.0, u_hi, 1e-14, 1e-12, &ok);
  require(ok, ErrorKind::NumericalFailure, "survival quadrature did not converge");
  return v;
}

/// Point predictors of W_{r+j} at fixed theta, one per loss (SE gives the
/// best unbiased predictor).
inline std::vector<double> point_predict(const ThetaVector& theta, const JointSample& sample, PredictionTarget target,
                                         const std::vector<Loss>& losses) {
  validate(theta);
  const auto shape = detail::make_shape(sample, target);
  const auto m = detail::moments(detail::make_terms(theta, shape), shape, losses);
  std::vector<double> out;
  for (std::size_t i = 0; i < losses.size(); ++i) out.push_back(detail::point_from_moment(losses[i], m[i]));
  return out;
}

/// Best unbiased predictor E[W_{r+j} | data] at theta.
inline double bup(const ThetaVector& theta, const JointSample& sample, PredictionTarget target) {
  return point_predict(theta, sample, target, {Loss::se()})[0];
}

struct PredictionInterval {
  Interval interval;
  bool boundary = false;        // HPD lower end sits at w_r
  bool multimodal = false;      // HPD replaced by the equal-tail interval
  double density_residual = 0.0;  // |f(L) - f(U)| / max(f(L), f(U)) at an interior HPD
};

/// Weighted mixture of conditional laws of W_{r+j}: one component for plug-in
/// prediction, one per posterior draw for Bayesian prediction.
class PredictiveMixture {
 public:
  PredictiveMixture(const JointSample& sample, PredictionTarget target, const std::vector<ThetaVector>& thetas,
                    const std::vector<double>& weights)
      : shape_(detail::make_shape(sample, target)) {
    require(thetas.size() == weights.size() && !thetas.empty(), ErrorKind::InvalidParameter,
            "mixture needs matching, non-empty draws and weights");
    // Components below 1e-14 of the largest weight change no reported digit.
    const double w_max = *std::max_element(weights.begin(), weights.end());
    double total = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      if (!(weights[i] > 1e-14 * w_max)) continue;
      validate(thetas[i]);
      terms_.push_back(detail::make_terms(thetas[i], shape_));
      weights_.push_back(weights[i]);
      total += weights[i];
    }
    require(total > 0.0, ErrorKind::DegenerateWeights, "mixture weights sum to zero");
    for (double& w : weights_) w /= total;
  }

  static PredictiveMixture plug_in(const JointSample& sample, PredictionTarget target, const ThetaVector& theta) {
    return PredictiveMixture(sample, target, {theta}, {1.0});
  }

  static PredictiveMixture posterior(const JointSample& sample, PredictionTarget target, const WeightedDraws& draws) {
    return PredictiveMixture(sample, target, draws.theta, draws.weight);
  }

  double w_r() const { return shape_.w_r; }

  double survival(double xi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) s += weights_[i] * detail::survival(terms_[i], shape_, xi);
    return s;
  }

  double density(double xi) const {
    double f = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) f += weights_[i] * detail::density(terms_[i], shape_, xi);
    return f;
  }

  /// Point predictors: SE mean of per-component means, LINEX and GE through
  /// the mixed moments E[exp(-v W)] and E[W^-k].
  std::vector<double> point(const std::vector<Loss>& losses) const {
    detail::MomentArray acc{};
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto m = detail::moments(terms_[i], shape_, losses);
      for (std::size_t k = 0; k < losses.size(); ++k) acc[k] += weights_[i] * m[k];
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < losses.size(); ++k) out.push_back(detail::point_from_moment(losses[k], acc[k]));
    return out;
  }

  /// Smallest xi with survival(xi) <= s, s in (0,1). `lo_hint` must satisfy
  /// survival(lo_hint) >= s when given.
  double survival_inverse(double s, double lo_hint = 0.0) const {
    require(s > 0.0 && s < 1.0, ErrorKind::InvalidParameter, "survival level must lie in (0,1)");
    double lo = std::max(shape_.w_r, lo_hint);
    double slo = lo == shape_.w_r ? 1.0 : survival(lo);
    double step = 0.25 * std::max(shape_.w_r, 1e-3);
    double hi = lo + step;
    double shi = survival(hi);
    int guard = 0;
    while (shi > s) {
      lo = hi;
      slo = shi;
      step *= 2.0;
      hi = lo + step;
      shi = survival(hi);
      require(++guard < 300, ErrorKind::NumericalFailure, "cannot bracket a predictive quantile");
    }
    return numeric::find_root([&](double x) { return survival(x) - s; }, lo, hi, slo - s, shi - s);
  }

  /// Equal-tail interval: survival(L) = 1 - alpha/2, survival(U) = alpha/2.
  PredictionInterval equal_tail(double level) const {
    require(level > 0.0 && level < 1.0, ErrorKind::InvalidParameter, "level must lie in (0,1)");
    const double a = 0.5 * (1.0 - level);
    const double lower = survival_inverse(1.0 - a);
    return {{lower, survival_inverse(a, lower)}};
  }

  /// Number of local maxima of the density on a grid over (w_r, upper].
  int count_modes(double upper, int grid = 64) const {
    std::vector<double> f(grid + 1);
    for (int i = 0; i <= grid; ++i) {
      const double x = shape_.w_r + (upper - shape_.w_r) * (static_cast<double>(i) + 1e-6) / grid;
      f[i] = density(x);
    }
    int modes = f[0] > f[1] ? 1 : 0;
    for (int i = 1; i < grid; ++i)
      if (f[i] > f[i - 1] && f[i] >= f[i + 1]) ++modes;
    return modes;
  }

  /// Shortest interval with coverage `level`. Width U(L) - L, with U(L) fixed
  /// by survival(L) - survival(U) = level, has derivative f(L)/f(U) - 1; the
  /// minimizer is either L = w_r or the root of f(L) = f(U(L)).
  PredictionInterval hpd(double level) const {
    require(level > 0.0 && level < 1.0, ErrorKind::InvalidParameter, "level must lie in (0,1)");
    const PredictionInterval et = equal_tail(level);
    if (count_modes(et.interval.upper) > 1) {
      PredictionInterval out = et;
      out.multimodal = true;
      return out;
    }
    auto upper_for = [&](double l, double hint) { return survival_inverse(survival(l) - level, hint); };
    PredictionInterval out;
    const double u0 = upper_for(shape_.w_r, 0.0);
    if (density(std::nextafter(shape_.w_r, numeric::kInf)) >= density(u0)) {
      out.interval = {shape_.w_r, u0};
      out.boundary = true;
      return out;
    }
    // f(L) - f(U(L)) < 0 at w_r; at the equal-tail lower end the upper density
    // is normally the smaller one. Walk right until the sign flips.
    const double l_cap = survival_inverse(level + 0.01 * (1.0 - level));
    double lo = shape_.w_r, hi = std::min(et.interval.lower, l_cap);
    auto gap = [&](double l) { return density(l) - density(upper_for(l, l)); };
    double ghi = gap(hi);
    while (ghi < 0.0 && hi < l_cap) {
      lo = hi;
      hi = std::min(l_cap, hi + (hi - shape_.w_r));
      ghi = gap(hi);
    }
    if (ghi < 0.0) {
      PredictionInterval fallback = et;
      fallback.multimodal = true;
      return fallback;
    }
    const double l = numeric::find_root(gap, lo, hi, gap(lo), ghi, 40);
    out.interval = {l, upper_for(l, l)};
    const double fl = density(out.interval.lower), fu = density(out.interval.upper);
    out.density_residual = std::abs(fl - fu) / std::max(fl, fu);
    return out;
  }

 private:
  detail::PredictionShape shape_;
  std::vector<detail::DrawTerms> terms_;
  std::vector<double> weights_;
};

/// Plug-in equal-tail prediction interval at theta.
inline Interval classical_pi(const ThetaVector& theta, const JointSample& sample, PredictionTarget target, double level) {
  return PredictiveMixture::plug_in(sample, target, theta).equal_tail(level).interval;
}

/// Bayesian point predictors from importance-weighted draws.
inline std::vector<double> bayes_predict(const WeightedDraws& draws, const JointSample& sample,
                                         PredictionTarget target, const std::vector<Loss>& losses) {
  return PredictiveMixture::posterior(sample, target, draws).point(losses);
}

/// Posterior predictive survival P(W_{r+j} > xi | data).
inline double bayes_pred_survival(const WeightedDraws& draws, const JointSample& sample, PredictionTarget target,
                                  double xi) {
  return PredictiveMixture::posterior(sample, target, draws).survival(xi);
}

/// Bayesian equal-tail prediction interval from the posterior predictive survival.
inline Interval bayes_pi(const WeightedDraws& draws, const JointSample& sample, PredictionTarget target, double level) {
  return PredictiveMixture::posterior(sample, target, draws).equal_tail(level).interval;
}

/// Bayesian shortest (HPD) prediction interval.
inline PredictionInterval bayes_hpd_pi(const WeightedDraws& draws, const JointSample& sample, PredictionTarget target,
                                       double level) {
  return PredictiveMixture::posterior(sample, target, draws).hpd(level);
}

}  // namespace burrjoint
