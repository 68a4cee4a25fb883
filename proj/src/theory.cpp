#include "szm/theory.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "szm/error.hpp"

namespace szm {
namespace {

void check_interior(std::span<const double> x, std::size_t d) {
  if (x.size() != d) throw UsageError("theory: dimension mismatch");
  for (const double v : x) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("theory: point must lie in the open orthant");
  }
}

void check_lambda(const SmoothingVector& m, std::span<const double> lambda, std::size_t d) {
  if (lambda.size() != d || m.dim() != d) throw UsageError("boundary: dimension mismatch");
  for (const double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("boundary: lambda_j must be finite and >= 0");
  }
}

}  // namespace

InteriorExpansion interior_expansion(const DistributionModel& model, std::span<const double> x) {
  check_interior(x, model.dim());
  const double f = model.cdf(x);
  InteriorExpansion e{f * (1.0 - f), 0.0, 0.0};
  for (std::size_t j = 0; j < x.size(); ++j) {
    e.V += model.partial(j, x) * std::sqrt(x[j] / std::numbers::pi);
    e.B += 0.5 * x[j] * model.partial2(j, x);
  }
  return e;
}

double interior_bias(const DistributionModel& model, const SmoothingVector& m,
                     std::span<const double> x) {
  check_interior(x, model.dim());
  double b = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    b += 0.5 * x[j] / static_cast<double>(m[j]) * model.partial2(j, x);
  }
  return b;
}

double variance_reduction(const DistributionModel& model, const SmoothingVector& m,
                          std::span<const double> x) {
  check_interior(x, model.dim());
  double v = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    v += model.partial(j, x) * std::sqrt(x[j] / std::numbers::pi) /
         std::sqrt(static_cast<double>(m[j]));
  }
  return v;
}

double interior_variance(const DistributionModel& model, const SmoothingVector& m,
                         std::span<const double> x, double n) {
  const double f = model.cdf(x);
  return (f * (1.0 - f) - variance_reduction(model, m, x)) / n;
}

double interior_mse(const InteriorExpansion& e, double n, double m) {
  return e.sigma2 / n - e.V / (n * std::sqrt(m)) + e.B * e.B / (m * m);
}

std::optional<double> m_opt_pointwise(const InteriorExpansion& e, double n) {
  if (e.V * e.B == 0.0) return std::nullopt;
  return std::pow(n, 2.0 / 3.0) * std::pow(4.0 * e.B * e.B / e.V, 2.0 / 3.0);
}

std::optional<double> m_opt_pointwise(const DistributionModel& model, std::span<const double> x,
                                      double n) {
  return m_opt_pointwise(interior_expansion(model, x), n);
}

IntegratedTerms integrated_terms(const DistributionModel& model, const EvaluationGrid& grid) {
  if (grid.dim() != model.dim()) throw UsageError("integrated_terms: dimension mismatch");
  std::vector<double> s2(grid.size()), v(grid.size()), b2(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto e = interior_expansion(model, grid.point(g));
    s2[g] = e.sigma2;
    v[g] = e.V;
    b2[g] = e.B * e.B;
  }
  return {grid.integrate(s2), grid.integrate(v), grid.integrate(b2)};
}

std::optional<double> m_opt_integrated(const IntegratedTerms& t, double n) {
  if (!(t.B2 > 0.0) || t.V == 0.0) return std::nullopt;
  return std::pow(n, 2.0 / 3.0) * std::pow(4.0 * t.B2 / t.V, 2.0 / 3.0);
}

std::optional<double> m_opt_integrated(const DistributionModel& model, const EvaluationGrid& grid,
                                       double n) {
  return m_opt_integrated(integrated_terms(model, grid), n);
}

std::int64_t deficiency_exact(double sigma2, double mse_sm) {
  if (!(mse_sm > 0.0)) throw DomainError("deficiency_exact: mse must be positive");
  if (!(sigma2 > 0.0)) throw DomainError("deficiency_exact: sigma2 must be positive");
  const double ratio = sigma2 / mse_sm;
  if (!(ratio < 9.0e18)) throw DomainError("deficiency_exact: ratio overflows a 64-bit count");
  auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ratio)));
  while (k > 1 && sigma2 / static_cast<double>(k - 1) <= mse_sm) --k;
  while (sigma2 / static_cast<double>(k) > mse_sm) ++k;
  return k;
}

namespace {

double leading_deficiency(double sigma2, double v, double b2, double n, Regime regime,
                          std::optional<double> m, std::optional<double> c) {
  if (!(sigma2 > 0.0)) throw DomainError("deficiency: sigma2 must be positive");
  if (regime == Regime::high) {
    if (!m || !(*m > 0.0)) throw UsageError("deficiency: high-smoothing regime needs m > 0");
    return n / std::sqrt(*m) * v / sigma2;
  }
  if (!c || !(*c > 0.0)) throw UsageError("deficiency: critical regime needs c > 0");
  return std::pow(n, 2.0 / 3.0) * (v / std::sqrt(*c) - b2 / (*c * *c)) / sigma2;
}

}  // namespace

double deficiency_asymptotic(const InteriorExpansion& e, double n, Regime regime,
                             std::optional<double> m, std::optional<double> c) {
  return leading_deficiency(e.sigma2, e.V, e.B * e.B, n, regime, m, c);
}

double deficiency_asymptotic(const DistributionModel& model, std::span<const double> x, double n,
                             Regime regime, std::optional<double> m, std::optional<double> c) {
  return deficiency_asymptotic(interior_expansion(model, x), n, regime, m, c);
}

double deficiency_asymptotic(const IntegratedTerms& t, double n, Regime regime,
                             std::optional<double> m, std::optional<double> c) {
  return leading_deficiency(t.sigma2, t.V, t.B2, n, regime, m, c);
}

std::vector<double> boundary_point(const SmoothingVector& m, std::span<const double> lambda) {
  if (lambda.size() != m.dim()) throw UsageError("boundary: dimension mismatch");
  std::vector<double> x(lambda.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = lambda[j] / static_cast<double>(m[j]);
  return x;
}

double boundary_bias(const DistributionModel& model, const SmoothingVector& m,
                     std::span<const double> lambda) {
  check_lambda(m, lambda, model.dim());
  auto x = boundary_point(m, lambda);
  // Any zero coordinate puts x on the boundary, where the estimator is 0 a.s.
  for (const double l : lambda) {
    if (l == 0.0) return 0.0;
  }
  double b = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    auto face = x;
    face[j] = 0.0;
    const double mj = static_cast<double>(m[j]);
    b += 0.5 * lambda[j] / (mj * mj) * model.partial2(j, face);
  }
  return b;
}

double boundary_variance(const DistributionModel& model, const SmoothingVector& m,
                         std::span<const double> lambda, double n) {
  check_lambda(m, lambda, model.dim());
  const auto x = boundary_point(m, lambda);
  const double f = model.cdf(x);
  return f * (1.0 - f) / n;
}

double boundary_mse(const DistributionModel& model, const SmoothingVector& m,
                    std::span<const double> lambda, double n) {
  const double b = boundary_bias(model, m, lambda);
  return boundary_variance(model, m, lambda, n) + b * b;
}

}  // namespace szm
