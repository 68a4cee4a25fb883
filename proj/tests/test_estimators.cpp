#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "szm/error.hpp"
#include "szm/estimators.hpp"
#include "szm/specialfn.hpp"

using namespace szm;

namespace {

Sample random_sample(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 3.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<double> v(n * d);
  for (auto& x : v) x = u(gen);
  return Sample(n, d, v);
}

}  // namespace

TEST(Sample, RejectsBadValues) {
  EXPECT_THROW(Sample(1, 2, {1.0, -0.5}), DomainError);
  EXPECT_THROW(Sample(1, 2, {1.0, NAN}), DomainError);
  EXPECT_THROW(Sample(2, 2, {1.0, 2.0, 3.0}), UsageError);
  EXPECT_THROW(Sample(0, 2, {}), UsageError);
}

TEST(Sample, ReadsDelimitedText) {
  std::istringstream in("# comment\nx,y\n1.5, 2\n\n3 4\n0,0\n");
  const auto s = read_sample(in, "mem");
  ASSERT_EQ(s.size(), 3u);
  ASSERT_EQ(s.dim(), 2u);
  EXPECT_EQ(s(0, 0), 1.5);
  EXPECT_EQ(s(1, 1), 4.0);
}

TEST(Sample, ReadErrorsNameTheLine) {
  std::istringstream bad("1,2\n3,abc\n");
  try {
    read_sample(bad, "data.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("data.csv:2"), std::string::npos) << e.what();
  }
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_sample(ragged, "r"), IoError);
  std::istringstream negative("1,2\n3,-1\n");
  try {
    read_sample(negative, "neg.csv");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("neg.csv:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_sample("/nonexistent/file.csv"), IoError);
}

TEST(SmoothingVector, Validation) {
  EXPECT_THROW(SmoothingVector({3, 0}), UsageError);
  EXPECT_THROW(SmoothingVector(std::vector<std::int64_t>{}), UsageError);
  const auto m = SmoothingVector::isotropic(7, 3).with(1, 2);
  EXPECT_EQ(m.min(), 2);
  EXPECT_EQ(m.max(), 7);
}

TEST(SnappedCeil, SnapsNearIntegers) {
  EXPECT_EQ(snapped_ceil(10.0, 0.3), 3);  // 10 * 0.3 = 3.0000000000000004
  EXPECT_EQ(snapped_ceil(3.0, 0.1 + 0.2), 1);
  EXPECT_EQ(snapped_ceil(5.0, 1e-300), 1);
  EXPECT_EQ(snapped_ceil(5.0, 0.0), 0);
  EXPECT_EQ(snapped_ceil(4.0, 1.26), 6);
}

TEST(EmpiricalCdf, Counts) {
  const Sample one(1, 2, {1.0, 2.0});
  const std::vector<double> corner = {1.0, 2.0}, off = {0.5, 3.0};
  EXPECT_EQ(empirical_cdf(one, corner), 1.0);
  EXPECT_EQ(empirical_cdf(one, off), 0.0);
  const Sample three(3, 2, {1, 1, 2, 2, 3, 3});
  const std::vector<double> mid = {2.0, 2.0};
  EXPECT_DOUBLE_EQ(empirical_cdf(three, mid), 2.0 / 3.0);
}

TEST(SmEstimate, SingleWeight) {
  const Sample s(1, 1, {1.0});
  const std::vector<double> x = {1.0};
  const auto m = SmoothingVector::isotropic(2, 1);
  EXPECT_NEAR(sm_weight(0, s, m, x), 1.0 - 3.0 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(sm_estimate(s, m, x), 0.5939941502901619, 1e-12);
}

TEST(SmEstimate, ZeroFaces) {
  const auto s = random_sample(15, 2, 1);
  const auto m = SmoothingVector({8, 13});
  const std::vector<double> face = {0.0, 1.2};
  EXPECT_EQ(sm_estimate(s, m, face), 0.0);
  const Sample origin(1, 2, {0.0, 0.0});
  const std::vector<double> x = {0.0, 4.0};
  EXPECT_EQ(sm_estimate(origin, m, x), 1.0);
}

TEST(SmEstimate, ProperDistributionFunction) {
  const auto s = random_sample(20, 2, 2);
  const auto m = SmoothingVector({9, 20});
  double prev = 0.0;
  for (double t = 0.0; t < 8.0; t += 0.25) {
    const std::vector<double> x = {t, t};
    const double f = sm_estimate(s, m, x);
    EXPECT_GE(f, prev - 1e-15);
    EXPECT_LE(f, 1.0);
    prev = f;
  }
  const std::vector<double> far = {200.0, 200.0};
  EXPECT_NEAR(sm_estimate(s, m, far), 1.0, 1e-12);
}

TEST(SmEstimate, MatchesLatticeSeries) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<std::size_t> nn(1, 20), dd(1, 2);
  std::uniform_int_distribution<std::int64_t> mm(1, 50);
  std::uniform_real_distribution<double> xx(0.0, 4.0);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = nn(gen), d = dd(gen);
    const auto s = random_sample(n, d, 100 + t);
    std::vector<std::int64_t> mv(d);
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) {
      mv[j] = mm(gen);
      x[j] = xx(gen);
    }
    const SmoothingVector m(mv);
    EXPECT_NEAR(sm_estimate(s, m, x), sm_estimate_series(s, m, x, 1e-8), 1e-8 + 1e-10);
  }
  const Sample one(1, 1, {1.0});
  const std::vector<double> x = {1.0};
  EXPECT_NEAR(sm_estimate_series(one, SmoothingVector({2}), x, 1e-8), 0.5939941502901619, 1e-8);
  EXPECT_THROW(sm_estimate_series(one, SmoothingVector({2}), x, 0.0), UsageError);
}

TEST(SmoothedOperator, Constants) {
  const auto m = SmoothingVector({5, 30});
  const std::vector<double> x = {0.7, 2.0};
  EXPECT_NEAR(smoothed_operator([](std::span<const double>) { return 1.0; }, m, x, 1e-12), 1.0, 1e-11);
  EXPECT_EQ(smoothed_operator([](std::span<const double>) { return 0.0; }, m, x, 1e-12), 0.0);
}

TEST(LeaveOneOut, MatchesRecomputation) {
  for (std::size_t n = 2; n <= 10; ++n) {
    const auto s = random_sample(n, 2, 40 + n);
    const auto m = SmoothingVector({6, 11});
    const std::vector<double> x = {1.3, 1.9};
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double loo = loo_estimate(i, s, m, x);
      EXPECT_NEAR(loo, sm_estimate(s.without(i), m, x), 1e-14);
      avg += loo / n;
    }
    EXPECT_NEAR(avg, sm_estimate(s, m, x), 1e-14);
  }
}

TEST(LeaveOneOut, TwoObservations) {
  const auto s = random_sample(2, 1, 9);
  const auto m = SmoothingVector({4});
  const std::vector<double> x = {1.5};
  EXPECT_NEAR(loo_estimate(0, s, m, x), sm_weight(1, s, m, x), 1e-15);
  EXPECT_NEAR(loo_estimate(1, s, m, x), sm_weight(0, s, m, x), 1e-15);
  const Sample one(1, 1, {1.0});
  EXPECT_THROW(loo_estimate(0, one, m, x), UsageError);
}

TEST(SmEstimator, ManyMatchesSingle) {
  const auto s = random_sample(12, 2, 5);
  const SmEstimator est(s, SmoothingVector({7, 9}));
  const std::vector<double> pts = {0.5, 0.5, 1.0, 2.0, 3.0, 0.1};
  const auto many = est.estimate_many(pts);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_DOUBLE_EQ(many[g], est.estimate(std::span<const double>(pts).subspan(2 * g, 2)));
  }
  const std::vector<double> bad = {-1.0, 1.0};
  EXPECT_THROW(est.estimate(bad), DomainError);
}
