#include "szm/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "szm/error.hpp"
#include "szm/rng.hpp"
#include "szm/specialfn.hpp"

namespace szm {
namespace {

void check_point(std::span<const double> x, std::size_t d, const char* who) {
  if (x.size() != d) throw UsageError(std::string(who) + ": dimension mismatch");
  for (const double v : x) {
    if (std::isnan(v) || v < 0.0) throw DomainError(std::string(who) + ": negative coordinate");
  }
}

void check_axis(std::size_t j, std::size_t d, const char* who) {
  if (j >= d) throw UsageError(std::string(who) + ": coordinate index out of range");
}

double lookup(const ModelParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

CdfFunction DistributionModel::cdf_function() const {
  return [this](std::span<const double> x) { return cdf(x); };
}

Partials model_partials(const DistributionModel& model, std::size_t j, std::span<const double> x) {
  return {model.partial(j, x), model.partial2(j, x)};
}

double clayton_cdf(std::span<const double> u, double theta) {
  if (!(theta > 0.0)) throw DomainError("clayton_cdf: theta must be positive");
  double excess = 0.0;  // S - 1 = sum_j (u_j^{-theta} - 1)
  for (const double v : u) {
    if (std::isnan(v) || v < 0.0 || v > 1.0) throw DomainError("clayton_cdf: u_j must lie in [0, 1]");
    if (v == 0.0) return 0.0;
    excess += std::expm1(-theta * std::log(v));
  }
  return std::clamp(std::exp(-std::log1p(excess) / theta), 0.0, 1.0);
}

// ---------------------------------------------------------------- M1

IndependentGammaModel::IndependentGammaModel(std::size_t d, double alpha, double beta)
    : d_(d), alpha_(alpha), beta_(beta) {
  if (d_ == 0) throw UsageError("m1: dimension must be positive");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw DomainError("m1: alpha and beta must be positive");
}

double IndependentGammaModel::cdf(std::span<const double> x) const {
  check_point(x, d_, "m1_cdf");
  double f = 1.0;
  for (const double v : x) f *= gamma_cdf(v, alpha_, beta_);
  return f;
}

double IndependentGammaModel::partial(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "m1 partial");
  check_axis(j, d_, "m1 partial");
  double f = gamma_pdf(x[j], alpha_, beta_);
  for (std::size_t i = 0; i < d_; ++i) {
    if (i != j) f *= gamma_cdf(x[i], alpha_, beta_);
  }
  return f;
}

double IndependentGammaModel::partial2(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "m1 partial2");
  check_axis(j, d_, "m1 partial2");
  double f = gamma_pdf_derivative(x[j], alpha_, beta_);
  for (std::size_t i = 0; i < d_; ++i) {
    if (i != j) f *= gamma_cdf(x[i], alpha_, beta_);
  }
  return f;
}

Sample IndependentGammaModel::sample(std::uint64_t seed, std::size_t n) const {
  if (n == 0) throw UsageError("sample: n must be positive");
  CounterRng rng(seed);
  std::vector<double> v(n * d_);
  for (auto& x : v) x = rng.gamma(alpha_) / beta_;
  return Sample(n, d_, std::move(v));
}

// ---------------------------------------------------------------- M2

ClaytonGammaModel::ClaytonGammaModel(std::size_t d, double theta, double alpha, double beta)
    : d_(d), theta_(theta), alpha_(alpha), beta_(beta) {
  if (d_ == 0) throw UsageError("m2: dimension must be positive");
  if (!(theta_ > 0.0)) throw DomainError("m2: theta must be positive");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw DomainError("m2: alpha and beta must be positive");
}

double ClaytonGammaModel::cdf(std::span<const double> x) const {
  check_point(x, d_, "m2_cdf");
  std::vector<double> u(d_);
  for (std::size_t j = 0; j < d_; ++j) u[j] = gamma_cdf(x[j], alpha_, beta_);
  return clayton_cdf(u, theta_);
}

// With R = sum_{i != j} u_i^{-theta} - (d - 1):
//   dC/du_j     = (1 + R u_j^theta)^{-1/theta - 1}
//   d2C/du_j^2  = -(theta + 1) R u_j^{theta - 1} (1 + R u_j^theta)^{-1/theta - 2}
double ClaytonGammaModel::copula_d1(std::size_t j, std::span<const double> u) const {
  double rest = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    if (i == j) continue;
    if (u[i] == 0.0) return 0.0;
    rest += std::expm1(-theta_ * std::log(u[i]));
  }
  if (u[j] == 0.0) return 1.0;
  return std::pow(1.0 + rest * std::pow(u[j], theta_), -1.0 / theta_ - 1.0);
}

double ClaytonGammaModel::copula_d2(std::size_t j, std::span<const double> u) const {
  double rest = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    if (i == j) continue;
    if (u[i] == 0.0) return 0.0;
    rest += std::expm1(-theta_ * std::log(u[i]));
  }
  if (rest == 0.0) return 0.0;
  if (u[j] == 0.0) {
    if (theta_ > 1.0) return 0.0;
    if (theta_ == 1.0) return -2.0 * rest;
    return -std::numeric_limits<double>::infinity();
  }
  const double a = rest * std::pow(u[j], theta_);
  return -(theta_ + 1.0) * rest * std::pow(u[j], theta_ - 1.0) *
         std::pow(1.0 + a, -1.0 / theta_ - 2.0);
}

double ClaytonGammaModel::partial(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "m2 partial");
  check_axis(j, d_, "m2 partial");
  std::vector<double> u(d_);
  for (std::size_t i = 0; i < d_; ++i) u[i] = gamma_cdf(x[i], alpha_, beta_);
  const double g = gamma_pdf(x[j], alpha_, beta_);
  if (g == 0.0) return 0.0;
  return copula_d1(j, u) * g;
}

double ClaytonGammaModel::partial2(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "m2 partial2");
  check_axis(j, d_, "m2 partial2");
  std::vector<double> u(d_);
  for (std::size_t i = 0; i < d_; ++i) u[i] = gamma_cdf(x[i], alpha_, beta_);
  const double g = gamma_pdf(x[j], alpha_, beta_);
  const double dg = gamma_pdf_derivative(x[j], alpha_, beta_);
  const double c1 = copula_d1(j, u);
  const double curvature = g == 0.0 ? 0.0 : copula_d2(j, u) * g * g;
  return curvature + (c1 == 0.0 ? 0.0 : c1 * dg);
}

Sample ClaytonGammaModel::sample(std::uint64_t seed, std::size_t n) const {
  if (n == 0) throw UsageError("sample: n must be positive");
  CounterRng rng(seed);
  const double below_one = std::nextafter(1.0, 0.0);
  std::vector<double> v(n * d_);
  for (std::size_t i = 0; i < n; ++i) {
    const double frailty = rng.gamma(1.0 / theta_);
    for (std::size_t j = 0; j < d_; ++j) {
      const double e = rng.exponential();
      double u = std::pow(1.0 + e / frailty, -1.0 / theta_);
      u = std::min(u, below_one);
      v[i * d_ + j] = gamma_quantile(u, alpha_, beta_);
    }
  }
  return Sample(n, d_, std::move(v));
}

// ---------------------------------------------------------------- exponential

ExponentialModel::ExponentialModel(std::size_t d, double rate) : d_(d), rate_(rate) {
  if (d_ == 0) throw UsageError("exp: dimension must be positive");
  if (!(rate_ > 0.0)) throw DomainError("exp: rate must be positive");
}

double ExponentialModel::cdf(std::span<const double> x) const {
  check_point(x, d_, "exp_cdf");
  double f = 1.0;
  for (const double v : x) f *= -std::expm1(-rate_ * v);
  return f;
}

double ExponentialModel::partial(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "exp partial");
  check_axis(j, d_, "exp partial");
  double f = rate_ * std::exp(-rate_ * x[j]);
  for (std::size_t i = 0; i < d_; ++i) {
    if (i != j) f *= -std::expm1(-rate_ * x[i]);
  }
  return f;
}

double ExponentialModel::partial2(std::size_t j, std::span<const double> x) const {
  check_point(x, d_, "exp partial2");
  check_axis(j, d_, "exp partial2");
  double f = -rate_ * rate_ * std::exp(-rate_ * x[j]);
  for (std::size_t i = 0; i < d_; ++i) {
    if (i != j) f *= -std::expm1(-rate_ * x[i]);
  }
  return f;
}

Sample ExponentialModel::sample(std::uint64_t seed, std::size_t n) const {
  if (n == 0) throw UsageError("sample: n must be positive");
  CounterRng rng(seed);
  std::vector<double> v(n * d_);
  for (auto& x : v) x = rng.exponential() / rate_;
  return Sample(n, d_, std::move(v));
}

std::unique_ptr<DistributionModel> make_model(const std::string& name, const ModelParams& params) {
  const double d_raw = lookup(params, "d", 2.0);
  if (!(d_raw >= 1.0) || d_raw != std::floor(d_raw)) throw UsageError("model: d must be a positive integer");
  const auto d = static_cast<std::size_t>(d_raw);
  if (name == "m1") {
    return std::make_unique<IndependentGammaModel>(d, lookup(params, "alpha", 2.0),
                                                   lookup(params, "beta", 1.0));
  }
  if (name == "m2") {
    return std::make_unique<ClaytonGammaModel>(d, lookup(params, "theta", 2.0),
                                               lookup(params, "alpha", 2.0),
                                               lookup(params, "beta", 1.0));
  }
  if (name == "exp") return std::make_unique<ExponentialModel>(d, lookup(params, "rate", 1.0));
  throw UsageError("unknown model '" + name + "' (expected m1, m2 or exp)");
}

}  // namespace szm
