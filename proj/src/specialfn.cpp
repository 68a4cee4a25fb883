#include "szm/specialfn.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "szm/error.hpp"

namespace szm {
namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;
constexpr int kMaxIter = 1'000'000;

// lgamma(n+1) - (n+1/2) log n + n - log sqrt(2 pi)
double stirling_error(double n) {
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLnSqrt2Pi;
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// x log(x / np) + np - x without cancellation near x = np.
double deviance(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double lower_gamma_series(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (term < sum * DBL_EPSILON * 0.5) break;
  }
  return poisson_pmf(a, x) * sum;
}

double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / DBL_EPSILON;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= DBL_EPSILON) break;
  }
  // e^{-x} x^a / Gamma(a) = a * pmf(a, x)
  return a * poisson_pmf(a, x) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma: shape must be positive and finite");
  }
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("incomplete gamma: argument must be nonnegative");
  }
}

}  // namespace

double poisson_pmf(double k, double lambda) {
  if (!(lambda >= 0.0) || !(k >= 0.0)) return 0.0;
  if (lambda == 0.0) return k == 0.0 ? 1.0 : 0.0;
  if (k == 0.0) return std::exp(-lambda);
  if (!std::isfinite(lambda)) return 0.0;
  if (k < 1.0) {
    return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
  }
  return std::exp(-stirling_error(k) - deviance(k, lambda)) /
         std::sqrt(2.0 * std::numbers::pi * k);
}

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, lower_gamma_series(a, x));
  return std::clamp(1.0 - upper_gamma_fraction(a, x), 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - lower_gamma_series(a, x), 0.0, 1.0);
  return std::min(1.0, upper_gamma_fraction(a, x));
}

double poisson_tail(double lambda, std::int64_t k) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("poisson_tail: lambda must be finite and nonnegative");
  }
  if (k < 0) throw DomainError("poisson_tail: threshold must be nonnegative");
  if (k == 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  return regularized_gamma_p(static_cast<double>(k), lambda);
}

double poisson_tail_bound(double lambda, double t) {
  if (!(t > 0.0)) throw DomainError("poisson_tail_bound: t must be positive");
  if (!(lambda >= 0.0)) throw DomainError("poisson_tail_bound: lambda must be nonnegative");
  return 2.0 * std::exp(-t * t / (2.0 * (lambda + t)));
}

double poisson_tail_halfwidth(double lambda, double eps) {
  if (!(eps > 0.0)) throw DomainError("poisson_tail_halfwidth: eps must be positive");
  if (!(lambda >= 0.0)) throw DomainError("poisson_tail_halfwidth: lambda must be nonnegative");
  if (eps >= 2.0) return std::numeric_limits<double>::min();
  // t^2 = 2a (lambda + t) with a = log(2 / eps)
  const double a = std::log(2.0 / eps);
  return a + std::sqrt(a * a + 2.0 * a * lambda);
}

void poisson_tail_sorted(double lambda, std::span<const std::int64_t> thresholds,
                         std::span<double> out) {
  if (out.size() != thresholds.size()) {
    throw UsageError("poisson_tail_sorted: output size mismatch");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("poisson_tail_sorted: lambda must be finite and nonnegative");
  }
  const std::size_t count = thresholds.size();
  if (count == 0) return;
  if (lambda == 0.0) {
    for (std::size_t t = 0; t < count; ++t) out[t] = thresholds[t] <= 0 ? 1.0 : 0.0;
    return;
  }
  const double half = poisson_tail_halfwidth(lambda, 1e-17);
  const auto lo = static_cast<std::int64_t>(std::floor(lambda - half));
  const auto hi = static_cast<std::int64_t>(std::ceil(lambda + half));

  // Highest index whose threshold lies inside (lo, hi].
  std::size_t top = count;
  for (std::size_t t = count; t-- > 0;) {
    const std::int64_t w = thresholds[t];
    if (w > hi) {
      out[t] = 0.0;
      continue;
    }
    top = t;
    break;
  }
  if (top == count) return;

  std::int64_t w = thresholds[top];
  double tail = w <= std::max<std::int64_t>(lo, 0) ? 1.0 : poisson_tail(lambda, w);
  double pmf_below = w >= 1 ? poisson_pmf(static_cast<double>(w - 1), lambda) : 0.0;
  for (std::size_t t = top + 1; t-- > 0;) {
    const std::int64_t target = thresholds[t];
    if (target <= 0) {
      out[t] = 1.0;
      continue;
    }
    if (target <= lo) {
      out[t] = 1.0;
      continue;
    }
    while (w > target) {
      tail += pmf_below;
      --w;
      pmf_below *= static_cast<double>(w) / lambda;
    }
    out[t] = std::min(tail, 1.0);
  }
}

double gamma_cdf(double x, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("gamma_cdf: alpha and beta must be positive");
  if (!(x >= 0.0)) throw DomainError("gamma_cdf: x must be nonnegative");
  return regularized_gamma_p(alpha, beta * x);
}

double gamma_pdf(double x, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("gamma_pdf: alpha and beta must be positive");
  if (!(x >= 0.0)) throw DomainError("gamma_pdf: x must be nonnegative");
  if (std::isinf(x)) return 0.0;
  if (x == 0.0) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    return alpha == 1.0 ? beta : 0.0;
  }
  if (alpha >= 1.0) return beta * poisson_pmf(alpha - 1.0, beta * x);
  return std::exp(alpha * std::log(beta) + (alpha - 1.0) * std::log(x) - beta * x -
                  std::lgamma(alpha));
}

double gamma_pdf_derivative(double x, double alpha, double beta) {
  if (x == 0.0) {
    if (alpha < 1.0) return -std::numeric_limits<double>::infinity();
    if (alpha == 1.0) return -beta * beta;
    if (alpha < 2.0) return std::numeric_limits<double>::infinity();
    return alpha == 2.0 ? beta * beta : 0.0;
  }
  return gamma_pdf(x, alpha, beta) * ((alpha - 1.0) / x - beta);
}

double gamma_quantile(double p, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("gamma_quantile: alpha and beta must be positive");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("gamma_quantile: p must lie in [0, 1)");
  if (p == 0.0) return 0.0;

  double lo = 0.0;
  double hi = alpha / beta + 20.0 * std::sqrt(alpha) / beta;
  while (gamma_cdf(hi, alpha, beta) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("gamma_quantile: failed to bracket root");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double f = gamma_cdf(x, alpha, beta) - p;
    // Relative residual, so lower-tail quantiles keep full precision.
    if (std::abs(f) <= 2.0 * DBL_EPSILON * p) break;
    if (f < 0.0) lo = x; else hi = x;
    const double dens = gamma_pdf(x, alpha, beta);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = hi - lo <= 4.0 * DBL_EPSILON * hi || std::abs(next - x) <= 1e-15 * x;
    x = next;
    if (done) break;
  }
  return x;
}

}  // namespace szm
