#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "szm/error.hpp"
#include "szm/models.hpp"
#include "szm/specialfn.hpp"

using namespace szm;

namespace {

// Number of inversions, by merge sort.
std::int64_t inversions(std::vector<double>& a, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::int64_t count = inversions(a, buf, lo, mid) + inversions(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      count += static_cast<std::int64_t>(mid - i);
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
  return count;
}

// Kendall's tau for tie-free data in O(n log n).
double kendall_tau(const Sample& s) {
  const std::size_t n = s.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s(a, 0) < s(b, 0); });
  std::vector<double> y(n), buf(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = s(idx[k], 1);
  const double disc = static_cast<double>(inversions(y, buf, 0, n));
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * disc / pairs;
}

const double kG1 = 1.0 - 2.0 * std::exp(-1.0);

}  // namespace

TEST(IndependentGamma, Cdf) {
  const IndependentGammaModel m1(2), one(1);
  const std::vector<double> x = {1.0, 1.0}, face = {0.0, 3.0}, x1 = {2.3};
  EXPECT_NEAR(m1.cdf(x), kG1 * kG1, 1e-15);
  EXPECT_NEAR(m1.cdf(x), 0.0698234, 1e-7);
  EXPECT_EQ(m1.cdf(face), 0.0);
  EXPECT_DOUBLE_EQ(one.cdf(x1), gamma_cdf(2.3, 2.0, 1.0));
}

TEST(IndependentGamma, Partials) {
  const IndependentGammaModel one(1);
  const std::vector<double> x = {1.0};
  EXPECT_NEAR(one.partial(0, x), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(one.partial2(0, x), 0.0, 1e-15);
  const IndependentGammaModel m1(2);
  const std::vector<double> y = {2.0, 0.5};
  EXPECT_NEAR(m1.partial2(0, y), -std::exp(-2.0) * gamma_cdf(0.5, 2, 1), 1e-15);
}

TEST(Clayton, Copula) {
  const std::vector<double> ones = {1.0, 1.0}, half = {0.5, 0.5}, edge = {0.3, 1.0}, zero = {0.0, 0.4};
  EXPECT_NEAR(clayton_cdf(ones, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(clayton_cdf(edge, 2.0), 0.3, 1e-15);
  EXPECT_NEAR(clayton_cdf(half, 2.0), 1.0 / std::sqrt(7.0), 1e-15);
  EXPECT_EQ(clayton_cdf(zero, 2.0), 0.0);
  const std::vector<double> bad = {1.2, 0.5};
  EXPECT_THROW(clayton_cdf(bad, 2.0), DomainError);
}

TEST(ClaytonGamma, Cdf) {
  const ClaytonGammaModel m2(2);
  const std::vector<double> x = {1.0, 1.0}, face = {2.0, 0.0}, far = {80.0, 80.0};
  const double expected = std::pow(2.0 / (kG1 * kG1) - 1.0, -0.5);
  EXPECT_NEAR(m2.cdf(x), expected, 1e-14);
  EXPECT_NEAR(m2.cdf(x), 0.190196, 1e-6);
  EXPECT_EQ(m2.cdf(face), 0.0);
  EXPECT_NEAR(m2.cdf(far), 1.0, 1e-14);
}

TEST(ClaytonGamma, PartialsMatchFiniteDifferences) {
  const ClaytonGammaModel m2(2);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x = {u(gen), u(gen)};
    for (std::size_t j = 0; j < 2; ++j) {
      auto at = [&](double v) {
        auto y = x;
        y[j] = v;
        return m2.cdf(y);
      };
      const double h1 = 1e-6 * x[j], h2 = 1e-4 * x[j];
      const double d1 = (at(x[j] + h1) - at(x[j] - h1)) / (2 * h1);
      const double d2 = (at(x[j] + h2) - 2 * at(x[j]) + at(x[j] - h2)) / (h2 * h2);
      EXPECT_NEAR(m2.partial(j, x), d1, 1e-5 * std::abs(d1) + 1e-9);
      EXPECT_NEAR(m2.partial2(j, x), d2, 1e-5 * std::abs(d2) + 1e-6);
    }
  }
}

TEST(ClaytonGamma, PartialsMatchFiniteDifferencesIn3d) {
  const ClaytonGammaModel m2(3, 1.3);
  const std::vector<double> x = {0.8, 2.0, 1.4};
  for (std::size_t j = 0; j < 3; ++j) {
    auto y = x, z = x;
    const double h = 1e-6;
    y[j] += h;
    z[j] -= h;
    EXPECT_NEAR(m2.partial(j, x), (m2.cdf(y) - m2.cdf(z)) / (2 * h), 1e-7);
  }
}

TEST(ClaytonGamma, BoundaryLimits) {
  const ClaytonGammaModel m2(2);
  const std::vector<double> face = {0.0, 1.5};
  EXPECT_EQ(m2.partial2(1, face), 0.0);
  EXPECT_TRUE(std::isfinite(m2.partial(0, face)));
}

TEST(Samplers, KendallTauOfClayton) {
  const ClaytonGammaModel m2(2);
  const auto s = m2.sample(2024, 100000);
  EXPECT_NEAR(kendall_tau(s), 0.5, 0.01);
  const IndependentGammaModel m1(2);
  EXPECT_NEAR(kendall_tau(m1.sample(5, 20000)), 0.0, 0.02);
}

TEST(Samplers, GammaMoments) {
  const IndependentGammaModel m1(2);
  const std::size_t n = 50000;
  const auto s = m1.sample(99, n);
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += s(i, j) / n;
    EXPECT_NEAR(mean, 2.0, 3.0 * std::sqrt(2.0) / std::sqrt(static_cast<double>(n)));
  }
}

TEST(Samplers, ClaytonMarginsAreGamma) {
  const ClaytonGammaModel m2(2);
  const std::size_t n = 40000;
  const auto s = m2.sample(3, n);
  for (double q : {0.5, 1.0, 2.0, 4.0}) {
    double frac = 0.0;
    for (std::size_t i = 0; i < n; ++i) frac += (s(i, 1) <= q) / static_cast<double>(n);
    const double p = gamma_cdf(q, 2.0, 1.0);
    EXPECT_NEAR(frac, p, 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(Samplers, Deterministic) {
  for (const std::string name : {"m1", "m2", "exp"}) {
    const auto model = make_model(name, {{"d", 2}});
    const auto a = model->sample(77, 50), b = model->sample(77, 50), c = model->sample(78, 50);
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  }
}

TEST(Exponential, BoundaryCurvature) {
  const ExponentialModel e(1, 1.5);
  const std::vector<double> zero = {0.0};
  EXPECT_NEAR(e.partial2(0, zero), -2.25, 1e-15);
  EXPECT_NEAR(e.partial(0, zero), 1.5, 1e-15);
}

TEST(MakeModel, Errors) {
  EXPECT_THROW(make_model("m3", {}), UsageError);
  EXPECT_THROW(make_model("m1", {{"d", 1.5}}), UsageError);
  EXPECT_THROW(make_model("m2", {{"theta", -1}}), DomainError);
  EXPECT_EQ(make_model("m2", {{"d", 3}})->dim(), 3u);
}
