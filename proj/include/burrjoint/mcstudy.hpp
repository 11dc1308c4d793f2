#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/fit_bayes.hpp"
#include "burrjoint/fit_mle.hpp"
#include "burrjoint/predict.hpp"
#include "burrjoint/random.hpp"
#include "burrjoint/shrink.hpp"

namespace burrjoint {

struct Design {
  int m = 0, n = 0, r = 0;

  std::string label() const {
    return "(" + std::to_string(m) + "," + std::to_string(n) + "," + std::to_string(r) + ")";
  }
  void validate() const {
    require(m >= 0 && n >= 0 && m + n >= 1 && r >= 1 && r <= m + n, ErrorKind::Config,
            "invalid design " + label());
  }
};

struct StudyConfig {
  ThetaVector theta_true{1.5, 1.0, 2.0, 0.5};
  std::vector<Design> designs;
  int n_s = 500;
  std::size_t draws = 2000;
  GammaPriors informative = GammaPriors::make_informative(3, 2, 3, 3, 2, 1, 3, 6);
  double gamma = 1.0;
  bool bayes = true;
  std::vector<Loss> losses{Loss::se(), Loss::linex(-0.25), Loss::linex(0.5), Loss::ge(-0.25), Loss::ge(0.5)};
  ShrinkConfig shrink{0.5, ThetaVector(1.45, 0.99, 1.95, 0.45), 0.05};
  double level = 0.95;
  std::uint64_t seed = 20240601;
  int parallelism = 1;
  std::vector<int> predict_j{1, 2};

  void validate() const {
    require(n_s >= 1, ErrorKind::Config, "n_s must be at least 1");
    require(draws >= 1, ErrorKind::Config, "D must be at least 1");
    require(!designs.empty(), ErrorKind::Config, "no designs");
    require(level > 0.0 && level < 1.0, ErrorKind::Config, "level must lie in (0,1)");
    require(parallelism >= 1, ErrorKind::Config, "parallelism must be at least 1");
    require(theta_true.valid(), ErrorKind::Config, "theta_true must be positive");
    for (const auto& d : designs) d.validate();
    for (int j : predict_j) require(j >= 1, ErrorKind::Config, "prediction steps must be positive");
    shrink.validate();
  }
};

/// Mean loss of estimates around the truth: squared error, LINEX
/// e^{v d} - v d - 1, or GE (t/theta)^k - k ln(t/theta) - 1.
inline double mse(const Loss& loss, const std::vector<double>& estimates, double truth) {
  require(!estimates.empty(), ErrorKind::InvalidParameter, "no estimates");
  numeric::CompensatedSum s;
  for (double t : estimates) {
    const double d = t - truth;
    switch (loss.kind) {
      case LossKind::SquaredError: s.add(d * d); break;
      case LossKind::Linex: s.add(std::expm1(loss.param * d) - loss.param * d); break;
      case LossKind::GeneralEntropy: {
        const double lr = std::log(t / truth);
        s.add(std::expm1(loss.param * lr) - loss.param * lr);
        break;
      }
    }
  }
  return s.value() / static_cast<double>(estimates.size());
}

inline double relative_efficiency(double rmse_base, double rmse_shrink) {
  require(rmse_base > 0.0 && rmse_shrink > 0.0, ErrorKind::InvalidParameter, "RMSE values must be positive");
  return rmse_base / rmse_shrink;
}

/// One point estimator tracked by the study.
struct EstimatorSpec {
  std::string label;  // e.g. "EM", "IN-linex:v=0.5", "LS[EM]", "SP[IN-se]"
  std::string base;   // label of the unshrunk estimator ("" for bases)
  Loss loss;          // loss used for its MSE
};

struct IntervalSpec {
  std::string label;  // "ACI", "IN-CrI", "IN-HPD", "NIN-CrI", "NIN-HPD"
};

/// Per-replication output slot; stored so SP membership can be audited.
struct ReplicationRecord {
  bool ok = false;
  std::string failure;
  std::vector<ThetaVector> estimates;            // parallel to StudyResult::estimators
  std::vector<std::array<Interval, 4>> intervals;  // parallel to StudyResult::intervals
  double ess_in = 0.0, ess_nin = 0.0;
  bool degenerate = false;
  std::vector<double> actual;                  // W_{r+j}, parallel to predict_j
  std::vector<std::vector<double>> predictions;  // [j][predictor]
  std::vector<std::vector<Interval>> pred_intervals;  // [j][interval]
  int prediction_failures = 0;
};

struct MetricsRow {
  std::string design;
  std::string estimator;
  std::string loss;
  int replications = 0;
  std::array<double, 4> bias{}, bias_se{}, mse{}, rmse{};
  std::array<double, 4> re{};  // base RMSE / this RMSE; NaN for bases
};

struct IntervalRow {
  std::string design;
  std::string interval;
  int replications = 0;
  std::array<double, 4> lower{}, upper{}, length{}, coverage{};
};

struct PredictionRow {
  std::string design;
  int j = 0;
  std::string predictor;
  int replications = 0;
  double bias = 0.0, mse = 0.0;
};

struct PredictionIntervalRow {
  std::string design;
  int j = 0;
  std::string interval;
  int replications = 0;
  double lower = 0.0, upper = 0.0, length = 0.0, coverage = 0.0;
};

struct DesignSummary {
  Design design;
  int attempted = 0;
  int failed = 0;
  int prediction_failures = 0;
  int degenerate_weights = 0;
  int sp_membership_violations = 0;
  std::map<std::string, int> failure_reasons;
};

struct StudyResult {
  std::vector<EstimatorSpec> estimators;
  std::vector<IntervalSpec> intervals;
  std::vector<std::string> predictors;
  std::vector<std::string> prediction_intervals;
  std::vector<MetricsRow> metrics;
  std::vector<IntervalRow> interval_rows;
  std::vector<PredictionRow> prediction_rows;
  std::vector<PredictionIntervalRow> prediction_interval_rows;
  std::vector<DesignSummary> designs;
  std::vector<std::vector<ReplicationRecord>> records;  // [design][replication]

  int total_failures() const {
    int f = 0;
    for (const auto& d : designs) f += d.failed;
    return f;
  }
};

namespace detail {

struct StudyLayout {
  std::vector<EstimatorSpec> estimators;
  std::vector<IntervalSpec> intervals;
  std::vector<std::string> predictors;
  std::vector<Loss> predictor_losses;  // parallel to Bayesian predictors per prior
  std::vector<std::string> prediction_intervals;
};

inline StudyLayout make_layout(const StudyConfig& cfg) {
  StudyLayout L;
  std::vector<EstimatorSpec> bases{{"EM", "", Loss::se()}};
  if (cfg.bayes)
    for (const std::string prior : {"IN", "NIN"})
      for (const auto& loss : cfg.losses) bases.push_back({prior + "-" + loss.label(), "", loss});
  L.estimators = bases;
  for (const auto& b : bases) L.estimators.push_back({"LS[" + b.label + "]", b.label, b.loss});
  for (const auto& b : bases) L.estimators.push_back({"SP[" + b.label + "]", b.label, b.loss});
  L.intervals.push_back({"ACI"});
  if (cfg.bayes)
    for (const std::string name : {"IN-CrI", "IN-HPD", "NIN-CrI", "NIN-HPD"}) L.intervals.push_back({name});
  L.predictors.push_back("BUP");
  for (const auto& loss : cfg.losses)
    if (loss.kind != LossKind::Linex || loss.param > 0.0) L.predictor_losses.push_back(loss);
  if (cfg.bayes)
    for (const std::string prior : {"IN", "NIN"})
      for (const auto& loss : L.predictor_losses) L.predictors.push_back(prior + "-" + loss.label());
  L.prediction_intervals.push_back("classical");
  if (cfg.bayes)
    for (const std::string name : {"IN-CrI", "IN-HPD", "NIN-CrI", "NIN-HPD"}) L.prediction_intervals.push_back(name);
  return L;
}

inline ReplicationRecord run_replication(const StudyConfig& cfg, const StudyLayout& L, const Design& design,
                                         std::size_t design_index, int rep) {
  ReplicationRecord rec;
  Rng rng = make_stream(cfg.seed, design_index, static_cast<std::uint64_t>(rep));
  try {
    const JointSample full = simulate_experiment(cfg.theta_true, design.m, design.n, rng);
    const JointSample sample = full.truncated(design.r);
    const MleFit fit = fit_mle(sample);
    const auto aci_int = aci(fit, cfg.level);
    const auto em_var = asymptotic_variances(fit.information);

    std::vector<ThetaVector> base_est{fit.theta};
    std::vector<std::array<double, 4>> base_var{em_var};
    rec.intervals.push_back(aci_int);

    WeightedDraws in_draws, nin_draws;
    if (cfg.bayes) {
      in_draws = importance_sample(sample, cfg.informative, cfg.draws, rng);
      nin_draws = importance_sample(sample, GammaPriors::quasi(cfg.gamma), cfg.draws, rng);
      rec.ess_in = in_draws.ess;
      rec.ess_nin = nin_draws.ess;
      rec.degenerate = in_draws.degenerate || nin_draws.degenerate;
      for (const WeightedDraws* d : {&in_draws, &nin_draws}) {
        std::array<double, 4> var{};
        for (int i = 0; i < 4; ++i) var[i] = posterior_variance(*d, i);
        for (const auto& loss : cfg.losses) {
          base_est.push_back(estimate(*d, loss));
          base_var.push_back(var);
        }
      }
      for (const WeightedDraws* d : {&in_draws, &nin_draws}) {
        std::array<Interval, 4> cri, hpd;
        for (int i = 0; i < 4; ++i) {
          cri[i] = credible_interval(*d, i, cfg.level);
          hpd[i] = hpd_interval(*d, i, cfg.level);
        }
        rec.intervals.push_back(cri);
        rec.intervals.push_back(hpd);
      }
    }
    rec.estimates = base_est;
    for (const auto& b : base_est) rec.estimates.push_back(linear_shrink(b, cfg.shrink));
    for (std::size_t k = 0; k < base_est.size(); ++k)
      rec.estimates.push_back(shrink_pretest(base_est[k], base_var[k], design.r, cfg.shrink).theta);

    const int remaining = design.m + design.n - design.r;
    for (int j : cfg.predict_j) {
      std::vector<double> preds(L.predictors.size(), numeric::kNaN);
      std::vector<Interval> ints(L.prediction_intervals.size(), {numeric::kNaN, numeric::kNaN});
      double actual = numeric::kNaN;
      if (j <= remaining) {
        actual = full.w()[design.r + j - 1];
        const PredictionTarget target{j};
        // Each predictor fails on its own: a posterior mean can be infinite
        // while the interval of the same mixture is well defined.
        auto guarded = [&](auto&& f) {
          try {
            f();
          } catch (const Error&) {
            ++rec.prediction_failures;
          }
        };
        std::size_t p = 0, q = 0;
        guarded([&] {
          const auto plug = PredictiveMixture::plug_in(sample, target, fit.theta);
          guarded([&] { preds[0] = plug.point({Loss::se()})[0]; });
          guarded([&] { ints[0] = plug.equal_tail(cfg.level).interval; });
        });
        p = 1;
        q = 1;
        if (cfg.bayes) {
          for (const WeightedDraws* d : {&in_draws, &nin_draws}) {
            const std::size_t p0 = p, q0 = q;
            guarded([&] {
              const auto mix = PredictiveMixture::posterior(sample, target, *d);
              for (std::size_t k = 0; k < L.predictor_losses.size(); ++k)
                guarded([&] { preds[p0 + k] = mix.point({L.predictor_losses[k]})[0]; });
              guarded([&] { ints[q0] = mix.equal_tail(cfg.level).interval; });
              guarded([&] { ints[q0 + 1] = mix.hpd(cfg.level).interval; });
            });
            p += L.predictor_losses.size();
            q += 2;
          }
        }
      }
      rec.actual.push_back(actual);
      rec.predictions.push_back(std::move(preds));
      rec.pred_intervals.push_back(std::move(ints));
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec = ReplicationRecord{};
    rec.ok = false;
    rec.failure = std::string(to_string(e.kind()));
  }
  return rec;
}

inline double mean_of(const std::vector<double>& v) {
  numeric::CompensatedSum s;
  for (double x : v) s.add(x);
  return v.empty() ? numeric::kNaN : s.value() / static_cast<double>(v.size());
}

}  // namespace detail

/// Runs every design n_s times. Replication i of design d always uses the
/// random stream (seed, d, i), and reductions run in replication order, so the
/// output does not depend on `parallelism`.
inline StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto L = detail::make_layout(cfg);
  StudyResult out;
  out.estimators = L.estimators;
  out.intervals = L.intervals;
  out.predictors = L.predictors;
  out.prediction_intervals = L.prediction_intervals;

  for (std::size_t di = 0; di < cfg.designs.size(); ++di) {
    const Design& design = cfg.designs[di];
    std::vector<ReplicationRecord> recs(static_cast<std::size_t>(cfg.n_s));
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next++; i < cfg.n_s; i = next++) recs[i] = detail::run_replication(cfg, L, design, di, i);
    };
    const int threads = std::min(cfg.parallelism, cfg.n_s);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    DesignSummary summary{design, cfg.n_s};
    std::vector<const ReplicationRecord*> ok;
    for (const auto& r : recs) {
      if (!r.ok) {
        ++summary.failed;
        ++summary.failure_reasons[r.failure];
        continue;
      }
      ok.push_back(&r);
      summary.prediction_failures += r.prediction_failures;
      if (r.degenerate) ++summary.degenerate_weights;
    }
    const std::string dl = design.label();
    const int n_ok = static_cast<int>(ok.size());

    // SP audit: each coordinate must equal its base or its LS value exactly.
    const std::size_t n_base = L.estimators.size() / 3;
    for (const auto* r : ok)
      for (std::size_t b = 0; b < n_base; ++b)
        for (int i = 0; i < 4; ++i) {
          const double sp = r->estimates[2 * n_base + b][i];
          if (sp != r->estimates[b][i] && sp != r->estimates[n_base + b][i]) ++summary.sp_membership_violations;
        }

    if (n_ok > 0) {
      std::map<std::string, std::array<double, 4>> rmse_by_label;
      for (std::size_t e = 0; e < L.estimators.size(); ++e) {
        const auto& spec = L.estimators[e];
        MetricsRow row{dl, spec.label, spec.loss.label(), n_ok};
        for (int i = 0; i < 4; ++i) {
          std::vector<double> est, dev;
          for (const auto* r : ok) {
            est.push_back(r->estimates[e][i]);
            dev.push_back(r->estimates[e][i] - cfg.theta_true[i]);
          }
          row.bias[i] = detail::mean_of(dev);
          double ss = 0.0;
          for (double d : dev) ss += (d - row.bias[i]) * (d - row.bias[i]);
          row.bias_se[i] = n_ok > 1 ? std::sqrt(ss / (n_ok - 1) / n_ok) : numeric::kNaN;
          row.mse[i] = mse(spec.loss, est, cfg.theta_true[i]);
          row.rmse[i] = std::sqrt(std::max(0.0, row.mse[i]));
          row.re[i] = numeric::kNaN;
          if (!spec.base.empty()) {
            const double base = rmse_by_label.at(spec.base)[i];
            if (base > 0.0 && row.rmse[i] > 0.0) row.re[i] = relative_efficiency(base, row.rmse[i]);
          }
        }
        rmse_by_label[spec.label] = row.rmse;
        out.metrics.push_back(row);
      }
      for (std::size_t k = 0; k < L.intervals.size(); ++k) {
        IntervalRow row{dl, L.intervals[k].label, n_ok};
        for (int i = 0; i < 4; ++i) {
          std::vector<double> lo, hi, len, cov;
          for (const auto* r : ok) {
            const Interval& iv = r->intervals[k][i];
            lo.push_back(iv.lower);
            hi.push_back(iv.upper);
            len.push_back(iv.length());
            cov.push_back(iv.contains(cfg.theta_true[i]) ? 1.0 : 0.0);
          }
          row.lower[i] = detail::mean_of(lo);
          row.upper[i] = detail::mean_of(hi);
          row.length[i] = detail::mean_of(len);
          row.coverage[i] = detail::mean_of(cov);
        }
        out.interval_rows.push_back(row);
      }
      for (std::size_t jj = 0; jj < cfg.predict_j.size(); ++jj) {
        for (std::size_t p = 0; p < L.predictors.size(); ++p) {
          std::vector<double> err;
          for (const auto* r : ok) {
            const double v = r->predictions[jj][p];
            if (std::isfinite(v) && std::isfinite(r->actual[jj])) err.push_back(v - r->actual[jj]);
          }
          if (err.empty()) continue;
          PredictionRow row{dl, cfg.predict_j[jj], L.predictors[p], static_cast<int>(err.size())};
          row.bias = detail::mean_of(err);
          std::vector<double> sq;
          for (double e : err) sq.push_back(e * e);
          row.mse = detail::mean_of(sq);
          out.prediction_rows.push_back(row);
        }
        for (std::size_t q = 0; q < L.prediction_intervals.size(); ++q) {
          std::vector<double> lo, hi, len, cov;
          for (const auto* r : ok) {
            const Interval& iv = r->pred_intervals[jj][q];
            if (!std::isfinite(iv.lower) || !std::isfinite(r->actual[jj])) continue;
            lo.push_back(iv.lower);
            hi.push_back(iv.upper);
            len.push_back(iv.length());
            cov.push_back(iv.contains(r->actual[jj]) ? 1.0 : 0.0);
          }
          if (lo.empty()) continue;
          PredictionIntervalRow row{dl, cfg.predict_j[jj], L.prediction_intervals[q], static_cast<int>(lo.size())};
          row.lower = detail::mean_of(lo);
          row.upper = detail::mean_of(hi);
          row.length = detail::mean_of(len);
          row.coverage = detail::mean_of(cov);
          out.prediction_interval_rows.push_back(row);
        }
      }
    }
    out.designs.push_back(summary);
    out.records.push_back(std::move(recs));
  }
  return out;
}

}  // namespace burrjoint
