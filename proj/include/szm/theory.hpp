#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "szm/estimators.hpp"
#include "szm/models.hpp"
#include "szm/qmc.hpp"

namespace szm {

// Leading-order interior quantities at one point:
//   sigma2 = F (1 - F)
//   V      = sum_j dF/dx_j sqrt(x_j / pi)
//   B      = 1/2 sum_j x_j d2F/dx_j^2
struct InteriorExpansion {
  double sigma2;
  double V;
  double B;
};

InteriorExpansion interior_expansion(const DistributionModel& model, std::span<const double> x);

// 1/2 sum_j (x_j / m_j) d2F/dx_j^2
double interior_bias(const DistributionModel& model, const SmoothingVector& m,
                     std::span<const double> x);
// V(x; m) = sum_j m_j^{-1/2} dF/dx_j sqrt(x_j / pi)
double variance_reduction(const DistributionModel& model, const SmoothingVector& m,
                          std::span<const double> x);
// n^{-1} sigma2 - n^{-1} V(x; m)
double interior_variance(const DistributionModel& model, const SmoothingVector& m,
                         std::span<const double> x, double n);
// Isotropic MSE expansion n^{-1} sigma2 - n^{-1} m^{-1/2} V + m^{-2} B^2, real m.
double interior_mse(const InteriorExpansion& e, double n, double m);

// n^{2/3} (4 B^2 / V)^{2/3}; empty when V * B == 0 (no finite optimum).
std::optional<double> m_opt_pointwise(const InteriorExpansion& e, double n);
std::optional<double> m_opt_pointwise(const DistributionModel& model, std::span<const double> x,
                                      double n);

// QMC integrals of sigma2, V and B^2 over a grid.
struct IntegratedTerms {
  double sigma2;
  double V;
  double B2;
};
IntegratedTerms integrated_terms(const DistributionModel& model, const EvaluationGrid& grid);

// n^{2/3} (4 int B^2 / int V)^{2/3}; empty when int B^2 == 0.
std::optional<double> m_opt_integrated(const IntegratedTerms& t, double n);
std::optional<double> m_opt_integrated(const DistributionModel& model, const EvaluationGrid& grid,
                                       double n);

// Smallest k >= 1 with sigma2 / k <= mse_sm.
std::int64_t deficiency_exact(double sigma2, double mse_sm);

enum class Regime { high, critical };

// Leading term of L(n, x) - n.
//   high:     (n / sqrt(m)) V / sigma2           (needs m)
//   critical: n^{2/3} (c^{-1/2} V - c^{-2} B^2) / sigma2   (needs c)
double deficiency_asymptotic(const InteriorExpansion& e, double n, Regime regime,
                             std::optional<double> m, std::optional<double> c);
double deficiency_asymptotic(const DistributionModel& model, std::span<const double> x, double n,
                             Regime regime, std::optional<double> m, std::optional<double> c);
// Global version, G(n) - n, from integrated terms.
double deficiency_asymptotic(const IntegratedTerms& t, double n, Regime regime,
                             std::optional<double> m, std::optional<double> c);

// Boundary layer x = lambda / m.
std::vector<double> boundary_point(const SmoothingVector& m, std::span<const double> lambda);
// 1/2 sum_j lambda_j m_j^{-2} d2F/dx_j^2 (x^{(j,0)})
double boundary_bias(const DistributionModel& model, const SmoothingVector& m,
                     std::span<const double> lambda);
// n^{-1} F(x) (1 - F(x)) at x = lambda / m
double boundary_variance(const DistributionModel& model, const SmoothingVector& m,
                         std::span<const double> lambda, double n);
double boundary_mse(const DistributionModel& model, const SmoothingVector& m,
                    std::span<const double> lambda, double n);

}  // namespace szm
