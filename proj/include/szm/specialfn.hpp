#pragma once

#include <cstdint>
#include <span>

namespace szm {

// Poisson probability mass e^{-lambda} lambda^k / Gamma(k+1), for real k >= 0.
// Uses the saddle-point form (Stirling error + deviance) so that large k and
// lambda keep full relative precision.
double poisson_pmf(double k, double lambda);

// P(Poi(lambda) >= k). Equals the lower regularized incomplete gamma P(k, lambda)
// for k >= 1 and 1 for k = 0.
double poisson_tail(double lambda, std::int64_t k);

// Upper bound 2 exp(-t^2 / (2 (lambda + t))) on P(|Poi(lambda) - lambda| >= t).
double poisson_tail_bound(double lambda, double t);

// Smallest t > 0 for which poisson_tail_bound(lambda, t) <= eps.
double poisson_tail_halfwidth(double lambda, double eps);

// Tail probabilities for a nondecreasing list of thresholds at one mean.
// Thresholds outside lambda +- poisson_tail_halfwidth(lambda, 1e-17) are
// snapped to 1 or 0; the remaining ones are filled by a single downward sweep
// over the Poisson pmf anchored at one incomplete-gamma evaluation.
void poisson_tail_sorted(double lambda, std::span<const std::int64_t> thresholds,
                         std::span<double> out);

// Regularized incomplete gamma functions, a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Gamma(alpha, beta) with beta a rate parameter.
double gamma_cdf(double x, double alpha, double beta);
double gamma_pdf(double x, double alpha, double beta);
double gamma_pdf_derivative(double x, double alpha, double beta);
double gamma_quantile(double p, double alpha, double beta);

}  // namespace szm
