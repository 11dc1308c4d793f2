#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "burrjoint/error.hpp"
#include "burrjoint/model.hpp"
#include "burrjoint/numeric.hpp"
#include "burrjoint/random.hpp"

namespace burrjoint {

/// (theta1, theta2) for population X, (theta3, theta4) for population Y.
struct ThetaVector {
  std::array<double, 4> v{1.0, 1.0, 1.0, 1.0};

  ThetaVector() = default;
  ThetaVector(double t1, double t2, double t3, double t4) : v{t1, t2, t3, t4} {}
  ThetaVector(const BurrParams& x, const BurrParams& y) : v{x.alpha, x.beta, y.alpha, y.beta} {}

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  BurrParams x() const { return {v[0], v[1]}; }
  BurrParams y() const { return {v[2], v[3]}; }

  bool valid() const {
    return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t) && t > 0.0; });
  }
};

inline void validate(const ThetaVector& t) {
  require(t.valid(), ErrorKind::InvalidParameter, "all four shape parameters must be finite and positive");
}

enum class Population { X = 0, Y = 1 };

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double length() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

enum class CensorCase { Case1 = 1, Case2 = 2, Case3 = 3 };

inline const char* to_string(CensorCase c) {
  switch (c) {
    case CensorCase::Case1: return "case1";
    case CensorCase::Case2: return "case2";
    case CensorCase::Case3: return "case3";
  }
  return "?";
}

/// Per-population view used by the likelihood: the logs of the observed
/// failure times of that population and the count censored at w_r.
struct PopulationData {
  std::vector<double> log_w;  // observed failures of this population
  int total = 0;              // m or n
  int censored = 0;           // m - m_r or n - n_r
  double log_w_r = 0.0;

  int observed() const { return static_cast<int>(log_w.size()); }
};

/// First r ordered failures of a joint type-II censored experiment on m units
/// of X and n units of Y. s_i = 1 marks an X failure. Ties in w are permitted.
class JointSample {
 public:
  JointSample() = default;

  JointSample(std::vector<double> w, std::vector<int> s, int m, int n)
      : w_(std::move(w)), s_(std::move(s)), m_(m), n_(n) {
    require(m >= 0 && n >= 0 && m + n >= 1, ErrorKind::InvalidSample, "sizes m and n must be non-negative with m+n >= 1");
    require(w_.size() == s_.size(), ErrorKind::InvalidSample, "w and s must have equal length");
    require(!w_.empty(), ErrorKind::InvalidSample, "sample must contain at least one failure");
    require(static_cast<int>(w_.size()) <= m + n, ErrorKind::InvalidSample, "r exceeds m+n");
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const std::string at = " at position " + std::to_string(i + 1);
      require(std::isfinite(w_[i]) && w_[i] > 0.0, ErrorKind::InvalidSample, "failure times must be finite and positive" + at);
      require(s_[i] == 0 || s_[i] == 1, ErrorKind::InvalidSample, "labels must be 0 or 1" + at);
      require(i == 0 || w_[i] >= w_[i - 1], ErrorKind::InvalidSample, "failure times must be non-decreasing" + at);
    }
    m_r_ = static_cast<int>(std::count(s_.begin(), s_.end(), 1));
    require(m_r_ <= m_, ErrorKind::InvalidSample, "more X failures than X units");
    require(r() - m_r_ <= n_, ErrorKind::InvalidSample, "more Y failures than Y units");
  }

  const std::vector<double>& w() const { return w_; }
  const std::vector<int>& s() const { return s_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int r() const { return static_cast<int>(w_.size()); }
  int total() const { return m_ + n_; }
  int m_r() const { return m_r_; }
  int n_r() const { return r() - m_r_; }
  double w_r() const { return w_.back(); }
  bool fully_observed() const { return r() == total(); }

  /// First `r` failures of this sample.
  JointSample truncated(int r) const {
    require(r >= 1 && r <= this->r(), ErrorKind::InvalidSample, "truncation length out of range");
    return JointSample(std::vector<double>(w_.begin(), w_.begin() + r),
                       std::vector<int>(s_.begin(), s_.begin() + r), m_, n_);
  }

  std::vector<double> values(Population pop) const {
    const int label = pop == Population::X ? 1 : 0;
    std::vector<double> out;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (s_[i] == label) out.push_back(w_[i]);
    return out;
  }

  PopulationData population(Population pop) const {
    PopulationData d;
    for (double x : values(pop)) d.log_w.push_back(std::log(x));
    d.total = pop == Population::X ? m_ : n_;
    d.censored = d.total - d.observed();
    d.log_w_r = std::log(w_r());
    return d;
  }

 private:
  std::vector<double> w_;
  std::vector<int> s_;
  int m_ = 0;
  int n_ = 0;
  int m_r_ = 0;
};

inline CensorCase classify_case(const JointSample& sample) {
  require(!sample.fully_observed(), ErrorKind::FullyObserved, "every unit has failed; nothing to predict");
  const bool x_left = sample.m_r() < sample.m();
  const bool y_left = sample.n_r() < sample.n();
  if (x_left && y_left) return CensorCase::Case3;
  return x_left ? CensorCase::Case1 : CensorCase::Case2;
}

/// Full ordered experiment: m draws from X then n from Y, merged with ties
/// broken X-first.
inline JointSample simulate_experiment(const ThetaVector& theta, int m, int n, Rng& rng) {
  validate(theta);
  require(m >= 0 && n >= 0 && m + n >= 1, ErrorKind::InvalidSample, "sizes m and n must be non-negative with m+n >= 1");
  const auto xs = sample(theta.x(), static_cast<std::size_t>(m), rng);
  const auto ys = sample(theta.y(), static_cast<std::size_t>(n), rng);
  std::vector<std::pair<double, int>> merged;
  merged.reserve(xs.size() + ys.size());
  for (double x : xs) merged.emplace_back(x, 1);
  for (double y : ys) merged.emplace_back(y, 0);
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  });
  std::vector<double> w;
  std::vector<int> s;
  for (const auto& [value, label] : merged) {
    w.push_back(value);
    s.push_back(label);
  }
  return JointSample(std::move(w), std::move(s), m, n);
}

inline JointSample generate_joint_sample(const ThetaVector& theta, int m, int n, int r, Rng& rng) {
  require(r >= 1 && r <= m + n, ErrorKind::InvalidSample, "r must satisfy 1 <= r <= m+n");
  return simulate_experiment(theta, m, n, rng).truncated(r);
}

namespace detail {

/// Log-likelihood contribution of one population, without constants.
inline double population_loglik(const PopulationData& d, double alpha, double beta) {
  const double k = d.observed();
  double sum_lw = 0.0, sum_sp = 0.0;
  for (double lw : d.log_w) {
    sum_lw += lw;
    sum_sp += numeric::softplus(beta * lw);
  }
  double ll = 0.0;
  if (k > 0) ll += k * (std::log(alpha) + std::log(beta)) + (beta - 1.0) * sum_lw - (alpha + 1.0) * sum_sp;
  if (d.censored > 0) ll -= d.censored * alpha * numeric::softplus(beta * d.log_w_r);
  return ll;
}

/// Gradient of population_loglik with respect to (log alpha, log beta).
inline std::array<double, 2> population_grad_log(const PopulationData& d, double alpha, double beta) {
  const double k = d.observed();
  double a_sum = 0.0, b_sum = 0.0;
  for (double lw : d.log_w) {
    a_sum += numeric::softplus(beta * lw);
    b_sum += lw - (alpha + 1.0) * numeric::logistic(beta * lw) * lw;
  }
  if (d.censored > 0) {
    a_sum += d.censored * numeric::softplus(beta * d.log_w_r);
    b_sum -= d.censored * alpha * numeric::logistic(beta * d.log_w_r) * d.log_w_r;
  }
  return {k - alpha * a_sum, k + beta * b_sum};
}

inline double log_multinomial_constant(const JointSample& s) {
  return std::lgamma(s.m() + 1.0) - std::lgamma(s.m() - s.m_r() + 1.0) + std::lgamma(s.n() + 1.0) -
         std::lgamma(s.n() - s.n_r() + 1.0);
}

}  // namespace detail

/// Joint type-II censored log-likelihood. The combinatorial constant
/// m! n! / ((m-m_r)! (n-n_r)!) is omitted unless requested.
inline double log_likelihood(const ThetaVector& theta, const JointSample& sample, bool include_constant = false) {
  validate(theta);
  double ll = detail::population_loglik(sample.population(Population::X), theta[0], theta[1]) +
              detail::population_loglik(sample.population(Population::Y), theta[2], theta[3]);
  if (include_constant) ll += detail::log_multinomial_constant(sample);
  return ll;
}

}  // namespace burrjoint
