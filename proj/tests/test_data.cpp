#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "test_support.hpp"

using namespace burrjoint;

TEST(JointSampleInvariants, RejectsBadInput) {
  EXPECT_THROW(JointSample({1.0, 0.5}, {1, 0}, 2, 2), Error);       // decreasing
  EXPECT_THROW(JointSample({1.0, 2.0}, {1, 2}, 2, 2), Error);       // label
  EXPECT_THROW(JointSample({1.0, 2.0}, {1, 1}, 1, 2), Error);       // m_r > m
  EXPECT_THROW(JointSample({-1.0, 2.0}, {1, 0}, 2, 2), Error);      // non-positive
  EXPECT_THROW(JointSample({1.0, 2.0, 3.0}, {1, 0, 1}, 1, 1), Error);  // r > m+n
  EXPECT_THROW(JointSample({}, {}, 1, 1), Error);
  EXPECT_NO_THROW(JointSample({1.0, 1.0}, {1, 1}, 2, 2));  // ties allowed
}

TEST(JointSampleInvariants, Counts) {
  const auto s = bjtest::fluid_joint(5);
  EXPECT_EQ(s.r(), 5);
  EXPECT_EQ(s.m_r(), 2);
  EXPECT_EQ(s.n_r(), 3);
  EXPECT_DOUBLE_EQ(s.w_r(), 0.80);
}

TEST(ClassifyCase, AllCases) {
  EXPECT_EQ(classify_case(bjtest::fluid_joint(5)), CensorCase::Case3);
  EXPECT_EQ(classify_case(JointSample({0.1, 0.2}, {1, 1}, 2, 3)), CensorCase::Case2);
  EXPECT_EQ(classify_case(JointSample({0.1, 0.2}, {0, 0}, 3, 2)), CensorCase::Case1);
  try {
    classify_case(JointSample({0.1, 0.2}, {0, 1}, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FullyObserved);
  }
}

TEST(GenerateJointSample, MatchesIndependentMergeSampler) {
  const ThetaVector theta(1.5, 1.0, 2.0, 0.5);
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    Rng a = make_stream(77, rep), b = make_stream(77, rep);
    const JointSample s = generate_joint_sample(theta, 20, 20, 20, a);
    const auto [w, lab] = bjtest::merge_sampler(theta, 20, 20, b);
    for (int i = 0; i < s.r(); ++i) {
      EXPECT_EQ(s.s()[i], lab[i]);
      EXPECT_NEAR(s.w()[i], w[i], 1e-12 * w[i]);
    }
  }
}

TEST(GenerateJointSample, ExpectedXCountMatchesMergeOracle) {
  const ThetaVector theta(1.5, 1.0, 2.0, 0.5);
  double lib = 0.0, oracle = 0.0;
  const int reps = 4000;
  for (int rep = 0; rep < reps; ++rep) {
    Rng a = make_stream(3, rep);
    lib += generate_joint_sample(theta, 20, 20, 20, a).m_r();
    Rng b = make_stream(4, rep);
    const auto [w, lab] = bjtest::merge_sampler(theta, 20, 20, b);
    for (int i = 0; i < 20; ++i) oracle += lab[i];
  }
  // both estimate E[m_r]; standard error of the difference is about 0.05
  EXPECT_NEAR(lib / reps, oracle / reps, 0.2);
}

TEST(GenerateJointSample, SymmetricLabels) {
  const ThetaVector theta(1.3, 0.7, 1.3, 0.7);
  int x_first = 0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = make_stream(9, rep);
    x_first += generate_joint_sample(theta, 1, 1, 1, rng).s()[0];
  }
  EXPECT_NEAR(static_cast<double>(x_first) / reps, 0.5, 0.02);
}

TEST(GenerateJointSample, NoCensoringObservesAll) {
  Rng rng = make_stream(1, 0);
  const auto s = generate_joint_sample(ThetaVector(1.5, 1, 2, 0.5), 7, 4, 11, rng);
  EXPECT_EQ(s.m_r(), 7);
  EXPECT_EQ(s.n_r(), 4);
  EXPECT_THROW(generate_joint_sample(ThetaVector(1.5, 1, 2, 0.5), 7, 4, 12, rng), Error);
}

TEST(LogLikelihood, MatchesDirectEvaluation) {
  const auto s = bjtest::fluid_joint(7);
  for (const ThetaVector& t : {ThetaVector(0.6, 3.0, 0.58, 1.8), ThetaVector(2.0, 0.4, 0.1, 5.0)})
    EXPECT_NEAR(log_likelihood(t, s), bjtest::naive_loglik(t, s.w(), s.s(), s.m(), s.n()), 1e-11);
}

TEST(LogLikelihood, SinglePointByHand) {
  // one X failure at w=2 out of m=3, n=2; theta=(1,1,2,1)
  const JointSample s({2.0}, {1}, 3, 2);
  const ThetaVector t(1.0, 1.0, 2.0, 1.0);
  const double hand = std::log(1.0 / 9.0) + 2.0 * std::log(1.0 / 3.0) + 2.0 * std::log(1.0 / 9.0);
  EXPECT_NEAR(log_likelihood(t, s), hand, 1e-12);
  const double constant = std::log(3.0 * 2.0 * 1.0 * 2.0 * 1.0 / (2.0 * 1.0 * 2.0 * 1.0));
  EXPECT_NEAR(log_likelihood(t, s, true), hand + constant, 1e-12);
}

TEST(LogLikelihood, UncensoredIsSumOfLogDensities) {
  Rng rng = make_stream(2, 0);
  const ThetaVector t(1.5, 1.0, 2.0, 0.5);
  const auto s = generate_joint_sample(t, 6, 5, 11, rng);
  double direct = 0.0;
  for (int i = 0; i < s.r(); ++i) direct += log_pdf(s.s()[i] ? t.x() : t.y(), s.w()[i]);
  EXPECT_NEAR(log_likelihood(t, s), direct, 1e-11);
}

TEST(LogLikelihood, LabelSwapInvariance) {
  const auto s = bjtest::fluid_joint(8);
  std::vector<int> flipped;
  for (int v : s.s()) flipped.push_back(1 - v);
  const JointSample swapped(s.w(), flipped, s.n(), s.m());
  const ThetaVector t(0.9, 2.1, 0.4, 1.3);
  EXPECT_NEAR(log_likelihood(t, s), log_likelihood(ThetaVector(t[2], t[3], t[0], t[1]), swapped), 1e-12);
}

TEST(LogLikelihood, DecreasesAsCensoringPointGrows) {
  const ThetaVector t(0.9, 2.1, 0.4, 1.3);
  double prev = 1e300;
  for (double wr : {1.2, 1.5, 2.0, 3.0}) {
    const JointSample s({0.2, 0.5, wr}, {0, 1, 1}, 10, 10);
    // only the censored tail terms depend on w_r once its own density is removed
    const double tail = log_likelihood(t, s) - log_pdf(t.x(), wr);
    EXPECT_LT(tail, prev);
    prev = tail;
  }
}

TEST(SampleCsv, RoundTripIsBitExact) {
  Rng rng = make_stream(42, 0);
  const auto s = generate_joint_sample(ThetaVector(1.5, 1, 2, 0.5), 30, 25, 40, rng);
  std::stringstream buf;
  io::write_sample_csv(buf, s, {"config: {\"m\":30,\"n\":25}"});
  const auto back = io::read_sample_csv(buf, 30, 25);
  ASSERT_EQ(back.r(), s.r());
  for (int i = 0; i < s.r(); ++i) {
    EXPECT_EQ(back.w()[i], s.w()[i]);
    EXPECT_EQ(back.s()[i], s.s()[i]);
  }
}

TEST(SampleCsv, ErrorsNameRowAndColumn) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      io::read_sample_csv(in, 5, 5, "sample.csv");
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSample);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string empty_s = message("w,s\n0.5,1\n0.7,\n");
  EXPECT_NE(empty_s.find("sample.csv:3"), std::string::npos) << empty_s;
  EXPECT_NE(empty_s.find("column s"), std::string::npos) << empty_s;
  const std::string bad_w = message("w,s\nabc,1\n");
  EXPECT_NE(bad_w.find("column w"), std::string::npos) << bad_w;
  EXPECT_NE(message("x,y\n0.5,1\n").find("header"), std::string::npos);
  EXPECT_NE(message("w,s\n0.9,1\n0.5,0\n").find("non-decreasing"), std::string::npos);
}
