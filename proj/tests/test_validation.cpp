#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "szm/error.hpp"
#include "szm/rng.hpp"
#include "szm/validation.hpp"

using namespace szm;

namespace {

bool all_pass(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

}  // namespace

TEST(Ks, KnownValues) {
  // Single point at the median: D = 1/2.
  EXPECT_NEAR(ks_statistic_normal({0.0}), 0.5, 1e-15);
  EXPECT_NEAR(ks_critical_value(2000, 0.01), 1.6276 / (std::sqrt(2000.0) + 0.12 + 0.11 / std::sqrt(2000.0)), 1e-4);
  CounterRng rng(3);
  std::vector<double> z(4000);
  for (auto& v : z) v = rng.normal();
  EXPECT_LT(ks_statistic_normal(z), ks_critical_value(z.size(), 0.01));
  for (auto& v : z) v += 0.3;
  EXPECT_GT(ks_statistic_normal(z), ks_critical_value(z.size(), 0.01));
}

TEST(Ols, Slope) {
  const std::vector<double> t = {1, 2, 4}, y = {3, 5, 9};
  EXPECT_NEAR(ols_slope(t, y), 2.0, 1e-14);
}

TEST(FastEstimate, MatchesDirect) {
  const auto model = make_model("m2", {{"d", 2}});
  const auto s = model->sample(4, 80);
  const std::vector<double> x = {1.2, 0.7};
  for (const auto& m : {SmoothingVector({3, 3}), SmoothingVector({40, 7}), SmoothingVector({300, 500})}) {
    EXPECT_NEAR(sm_estimate_fast(s, m, x), sm_estimate(s, m, x), 1e-13);
  }
}

TEST(MonteCarlo, ThreadInvariant) {
  const auto model = make_model("m1", {{"d", 1}});
  const std::vector<double> x = {1.0};
  const std::vector<SmoothingVector> ms = {SmoothingVector({10}), SmoothingVector({40})};
  const auto a = mc_point_estimates(*model, x, 50, ms, 64, 9, "t", 1);
  const auto b = mc_point_estimates(*model, x, 50, ms, 64, 9, "t", 4);
  EXPECT_EQ(a, b);
}

TEST(Suites, DeterministicSuitesPass) {
  for (const std::string s : {"bias", "boundary", "deficiency"}) {
    const auto rows = run_suite(s);
    EXPECT_FALSE(rows.empty()) << s;
    for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.name << " " << r.predicted << " " << r.observed;
  }
}

TEST(Suites, BiasCoversModelsAndGrid) {
  const auto rows = bias_checks();
  for (const std::string key : {"bias:m1:d1", "bias:m1:d2", "bias:m2:d1", "bias:m2:d2"}) {
    for (const std::string m : {":m=32", ":m=64", ":m=128", ":m=256"}) {
      EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [&](const CheckRow& r) {
        return r.name.starts_with(key) && r.name.ends_with(m);
      })) << key << m;
    }
  }
}

TEST(Suites, SkellamRows) {
  const auto rows = skellam_checks({});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(all_pass(rows));
  EXPECT_NEAR(rows[0].predicted, std::sqrt(2.0 / std::numbers::pi) * std::sqrt(50.0), 1e-12);
}

TEST(Suites, ReducedMonteCarloRuns) {
  ValidationOptions o;
  o.reps_scale = 0.05;
  const auto v = variance_checks(o);
  EXPECT_EQ(v.size(), 8u);
  const auto c = clt_checks(o);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_GT(c[0].tolerance, 0.0);
}

TEST(Suites, UnknownSuite) { EXPECT_THROW(run_suite("nope"), UsageError); }

TEST(Consistency, SupErrorShrinks) {
  // sup over a 21 x 21 grid on [0,5]^2 of |F_hat - F| with m = n.
  const auto model = make_model("m1", {{"d", 2}});
  std::vector<double> pts;
  for (int a = 0; a <= 20; ++a) {
    for (int b = 0; b <= 20; ++b) {
      pts.push_back(0.25 * a);
      pts.push_back(0.25 * b);
    }
  }
  std::vector<double> truth(pts.size() / 2);
  for (std::size_t g = 0; g < truth.size(); ++g) truth[g] = model->cdf(std::span<const double>(pts).subspan(2 * g, 2));
  double prev = INFINITY;
  for (std::size_t n : {50, 200, 800}) {
    std::vector<double> sup;
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto s = model->sample(mix_seed({123, n, r}), n);
      const SmEstimator est(s, SmoothingVector::isotropic(static_cast<std::int64_t>(n), 2));
      const auto f = est.estimate_many(pts);
      double worst = 0.0;
      for (std::size_t g = 0; g < f.size(); ++g) worst = std::max(worst, std::abs(f[g] - truth[g]));
      sup.push_back(worst);
    }
    std::nth_element(sup.begin(), sup.begin() + 25, sup.end());
    EXPECT_LT(sup[25], prev) << n;
    prev = sup[25];
  }
}

TEST(Rows, CsvOutput) {
  std::ostringstream os;
  const std::vector<CheckRow> rows = {{"a:b", 1.0, 2.0, 0.5, false}};
  write_check_rows(os, rows);
  EXPECT_EQ(os.str(), "check,predicted,observed,tolerance,pass\na:b,1,2,0.5,fail\n");
}
