#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace burrjoint;

TEST(BurrPdf, ClosedFormPoints) {
  EXPECT_DOUBLE_EQ(pdf({1.5, 1.0}, 0.0), 1.5);
  EXPECT_NEAR(pdf({1.0, 1.0}, 1.0), 0.25, 1e-15);
  EXPECT_EQ(pdf({2.0, 3.0}, 0.0), 0.0);
  for (double x : {0.01, 0.3, 1.0, 2.5, 40.0})
    EXPECT_NEAR(pdf({0.7, 2.3}, x), bjtest::naive_pdf(0.7, 2.3, x), 1e-13 * bjtest::naive_pdf(0.7, 2.3, x));
}

TEST(BurrPdf, IntegratesToOne) {
  for (BurrParams p : {BurrParams{1.5, 1.0}, BurrParams{0.6, 3.0}, BurrParams{2.0, 0.5}}) {
    bool ok = false;
    // integrate in u = 1/(1+x^beta): covers the half-line and absorbs the
    // x^(beta-1) singularity at the origin
    const double total = numeric::integrate(
        [&](double u) {
          const double z = (1.0 - u) / u;
          const double x = std::pow(z, 1.0 / p.beta);
          return pdf(p, x) * std::pow(z, 1.0 / p.beta - 1.0) / (p.beta * u * u);
        },
        0.0, 1.0, 1e-12, 1e-10, &ok);
    EXPECT_TRUE(ok);
    EXPECT_NEAR(total, 1.0, 1e-6) << p.alpha << "," << p.beta;
  }
  const double finite = numeric::integrate([](double x) { return pdf({1.5, 1.0}, x); }, 0.0, 1e6);
  EXPECT_NEAR(finite, 1.0 - sf({1.5, 1.0}, 1e6), 1e-6);
}

TEST(BurrPdf, MatchesDifferencedCdf) {
  const BurrParams p{0.8, 1.7};
  for (int i = 1; i <= 200; ++i) {
    const double x = 0.025 * i;
    const double h = 1e-5 * std::max(1.0, x);
    const double fd = (cdf(p, x + h) - cdf(p, x - h)) / (2.0 * h);
    EXPECT_NEAR(pdf(p, x), fd, 1e-6) << "x=" << x;
  }
}

TEST(BurrSf, ClosedFormPoints) {
  EXPECT_EQ(sf({1.5, 1.0}, 0.0), 1.0);
  EXPECT_NEAR(sf({1.5, 1.0}, 1.0), std::pow(2.0, -1.5), 1e-15);
  EXPECT_NEAR(sf({2.0, 0.5}, 4.0), 1.0 / 9.0, 1e-15);
}

TEST(BurrSf, LomaxReduction) {
  for (double x : {0.0, 0.5, 3.0, 100.0}) EXPECT_NEAR(sf({2.5, 1.0}, x), std::pow(1.0 + x, -2.5), 1e-14);
}

TEST(BurrSf, ComplementsCdfAndDecreases) {
  const BurrParams p{0.9, 2.2};
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 0.01 * i * i;
    const double s = sf(p, x), c = cdf(p, x);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(s + c, 1.0, 1e-15);
    EXPECT_LE(s, prev);
    prev = s;
  }
}

TEST(BurrSf, LargeShapeDoesNotOverflow) {
  const BurrParams p{2.0, 400.0};
  EXPECT_EQ(sf(p, 3.0), 0.0);
  EXPECT_TRUE(std::isfinite(log_sf(p, 3.0)));
  EXPECT_NEAR(log_sf(p, 3.0), -2.0 * 400.0 * std::log(3.0), 1e-9);
}

TEST(BurrQuantile, ClosedFormPoints) {
  EXPECT_NEAR(quantile({1.0, 1.0}, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(quantile({1.5, 1.0}, 1.0 - std::pow(2.0, -1.5)), 1.0, 1e-14);
}

TEST(BurrQuantile, RoundTripGrid) {
  for (BurrParams p : {BurrParams{1.5, 1.0}, BurrParams{0.6, 3.0}, BurrParams{4.0, 0.3}}) {
    double worst = 0.0;
    for (int i = 1; i < 1000; ++i) {
      const double u = i / 1000.0;
      worst = std::max(worst, std::abs(cdf(p, quantile(p, u)) - u));
    }
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(BurrQuantile, RejectsOutOfRange) {
  EXPECT_THROW(quantile({1.0, 1.0}, 1.0), Error);
  EXPECT_THROW(quantile({1.0, 1.0}, -0.1), Error);
}

TEST(BurrParamsValidation, RejectsNonPositive) {
  EXPECT_THROW(pdf({0.0, 1.0}, 1.0), Error);
  EXPECT_THROW(sf({1.0, -2.0}, 1.0), Error);
  try {
    cdf({-1.0, 1.0}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
}

TEST(BurrSample, EmpiricalCdfConverges) {
  Rng rng = make_stream(11, 0);
  const BurrParams p{1.5, 1.0};
  const auto draws = sample(p, 100000, rng);
  EXPECT_LT(ks_test(draws, p).distance, 0.01);
}

TEST(BurrSample, DeterministicAndSized) {
  Rng a = make_stream(5, 1), b = make_stream(5, 1);
  EXPECT_EQ(sample({2.0, 0.5}, 50, a), sample({2.0, 0.5}, 50, b));
  Rng c = make_stream(5, 2);
  EXPECT_EQ(sample({2.0, 0.5}, 1, c).size(), 1u);
}

TEST(KsTest, DistanceOnQuantileGrid) {
  const BurrParams p{1.2, 0.8};
  for (int n : {5, 20, 101}) {
    std::vector<double> x;
    for (int i = 1; i <= n; ++i) x.push_back(quantile(p, (i - 0.5) / n));
    EXPECT_NEAR(ks_test(x, p).distance, 0.5 / n, 1e-12);
  }
}

TEST(KsTest, FluidGroups) {
  const auto kx = ks_test(bjtest::fluid_x(), {0.6032, 2.9909});
  const auto ky = ks_test(bjtest::fluid_y(), {0.5790, 1.8414});
  EXPECT_NEAR(kx.distance, 0.2312, 1e-3);
  EXPECT_NEAR(ky.distance, 0.1512, 1e-3);
  ASSERT_TRUE(kx.p_value.has_value());
  EXPECT_NEAR(*kx.p_value, 0.58, 0.05);
}

TEST(KsTest, SmallSampleHasNoPValue) {
  const std::vector<double> x{0.5, 1.0, 2.0};
  EXPECT_FALSE(ks_test(x, {1.0, 1.0}).p_value.has_value());
  EXPECT_THROW(ks_test(std::vector<double>{}, {1.0, 1.0}), Error);
}

TEST(KolmogorovDistribution, MatchesReferenceValues) {
  // scipy.special.kolmogorov
  const std::vector<std::pair<double, double>> ref{{0.05, 1.0},
                                                   {0.3, 0.9999906941986655},
                                                   {0.5, 0.9639452436648751},
                                                   {0.8, 0.5441424115741981},
                                                   {1.0, 0.26999967167735456},
                                                   {1.3581, 0.0499996304316674},
                                                   {2.0, 0.0006709252557796953},
                                                   {3.0, 3.045995948942526e-08}};
  for (auto [x, q] : ref) EXPECT_NEAR(numeric::kolmogorov_q(x), q, 1e-12 + 1e-10 * q) << x;
}
