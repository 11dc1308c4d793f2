// Published reference values for the fluid data, each checked at its stated
// tolerance. Prints one PASS/FAIL line per value; exit status is nonzero if
// any value falls outside its tolerance.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace burrjoint;

namespace {

int failures = 0;

void check(const std::string& name, double value, double target, double tol) {
  const bool ok = std::isfinite(value) && std::abs(value - target) <= tol;
  failures += !ok;
  std::printf("%s %-44s got %10.4f  want %10.4f +- %.4g\n", ok ? "PASS" : "FAIL", name.c_str(), value, target, tol);
}

void check_true(const std::string& name, bool ok, const std::string& detail) {
  failures += !ok;
  std::printf("%s %-44s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

void guarded(const std::string& name, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    ++failures;
    std::printf("FAIL %-44s %s\n", name.c_str(), e.what());
  }
}

}  // namespace

int main() {
  const auto r5 = bjtest::fluid_joint(5);
  const auto r10 = bjtest::fluid_joint(10);
  const auto pr = bjtest::fluid_priors();

  guarded("goodness of fit", [] {
    const auto kx = ks_test(bjtest::fluid_x(), BurrParams{0.6032, 2.9909});
    const auto ky = ks_test(bjtest::fluid_y(), BurrParams{0.5790, 1.8414});
    check("X KS distance", kx.distance, 0.2312, 1e-3);
    check("X KS p-value", kx.p_value.value_or(std::nan("")), 0.58, 0.05);
    check("Y KS distance", ky.distance, 0.1512, 1e-3);
  });

  guarded("censored MLE", [&] {
    const MleFit fit = fit_mle(r10);
    const double t[4] = {0.6542, 3.7840, 0.8250, 2.4788};
    for (int i = 0; i < 4; ++i)
      check("r=10 MLE theta" + std::to_string(i + 1), fit.theta[i], t[i], 0.05 * t[i]);
    const auto ci = aci(fit, 0.95);
    check("r=10 ACI theta1 lower", ci[0].lower, 0.1296, 0.05);
    check("r=10 ACI theta1 upper", ci[0].upper, 1.1788, 0.05);
    const MleFit f5 = fit_mle(r5);
    check("r=5 ACI theta1 lower truncated", aci(f5, 0.95)[0].lower, 0.0, 5e-5);
  });

  guarded("reference r=5 point is a local maximum", [&] {
    const ThetaVector ref(0.2502, 1.8416, 1.2143, 3.2679);
    const double base = log_likelihood(ref, r5);
    Rng rng = make_stream(5, 0);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    int higher = 0;
    for (int k = 0; k < 100; ++k) {
      ThetaVector t = ref;
      for (int i = 0; i < 4; ++i) t[i] *= 1.0 + jitter(rng);
      higher += log_likelihood(t, r5) > base;
    }
    check_true("r=5 reference point is a local maximum", higher == 0,
               std::to_string(higher) + " of 100 perturbations have higher log-likelihood (MLE loglik " +
                   std::to_string(fit_mle(r5).loglik) + " vs " + std::to_string(base) + ")");
  });

  guarded("Bayes estimates", [&] {
    Rng rng = make_stream(1, 0);
    const auto d = importance_sample(r10, pr, 10000, rng);
    check("r=10 IN SE theta1", estimate(d, 0, Loss::se()), 0.7948, 0.05);
    check("r=10 IN LINEX(0.5) theta1", estimate(d, 0, Loss::linex(0.5)), 0.7834, 0.05);
    const Interval cri = credible_interval(d, 0, 0.95), hpd = hpd_interval(d, 0, 0.95);
    check("r=10 IN CrI theta1 lower", cri.lower, 0.4374, 0.05);
    check("r=10 IN CrI theta1 upper", cri.upper, 0.8784, 0.05);
    check("r=10 IN HPD theta1 lower", hpd.lower, 0.4334, 0.05);
    check("r=10 IN HPD theta1 upper", hpd.upper, 0.8725, 0.05);
  });

  guarded("shrinkage", [] {
    check("LS theta1 at w=0.5", linear_shrink(0.2502, 0.6, 0.5), 0.4251, 5e-5);
  });

  guarded("classical prediction", [&] {
    const MleFit fit = fit_mle(r5);
    check("r=5 BUP j=1", bup(fit.theta, r5, PredictionTarget{1}), 0.8667, 0.01);
    check("r=5 BUP j=2", bup(fit.theta, r5, PredictionTarget{2}), 0.9377, 0.01);
    const Interval pi = classical_pi(fit.theta, r5, PredictionTarget{1}, 0.95);
    check("r=5 classical PI j=1 lower", pi.lower, 0.8027, 0.01);
    check("r=5 classical PI j=1 upper", pi.upper, 1.1610, 0.01);
  });

  guarded("Bayes prediction", [&] {
    Rng rng = make_stream(1, 0);
    const auto in = importance_sample(r5, pr, 10000, rng);
    const auto nin = importance_sample(r5, GammaPriors::quasi(1.0), 10000, rng);
    const PredictionTarget t{1};
    guarded("r=5 IN SE prediction j=1",
            [&] { check("r=5 IN SE prediction j=1", bayes_predict(in, r5, t, {Loss::se()})[0], 0.9008, 0.05); });
    guarded("r=5 NIN SE prediction j=1",
            [&] { check("r=5 NIN SE prediction j=1", bayes_predict(nin, r5, t, {Loss::se()})[0], 0.9682, 0.05); });
    const Interval cri = bayes_pi(in, r5, t, 0.95);
    check("r=5 IN CrI j=1 lower", cri.lower, 0.8023, 0.02);
    check("r=5 IN CrI j=1 upper", cri.upper, 1.0973, 0.02);
    const Interval hpd = bayes_hpd_pi(in, r5, t, 0.95).interval;
    check("r=5 IN HPD j=1 lower", hpd.lower, 0.8021, 0.02);
    check("r=5 IN HPD j=1 upper", hpd.upper, 1.0710, 0.02);
    const Interval nin_cri = bayes_pi(nin, r5, t, 0.95);
    check_true("r=5 NIN CrI wider than IN CrI", nin_cri.length() > cri.length(),
               std::to_string(nin_cri.length()) + " vs " + std::to_string(cri.length()));
  });

  std::printf("%d reference value(s) outside tolerance\n", failures);
  return failures == 0 ? 0 : 1;
}
