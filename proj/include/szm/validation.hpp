#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "szm/estimators.hpp"
#include "szm/models.hpp"

namespace szm {

struct CheckRow {
  std::string name;
  double predicted;
  double observed;
  double tolerance;
  bool pass;
};

struct ValidationOptions {
  std::uint64_t seed = 20240917;
  unsigned threads = 0;  // 0 = SZM_THREADS or hardware concurrency
  // Multiplies every Monte Carlo replication count (tests use < 1).
  double reps_scale = 1.0;
};

// Suites run by `validate`.
std::span<const std::string> validation_suites();
std::vector<CheckRow> run_suite(const std::string& suite, const ValidationOptions& options = {});

std::vector<CheckRow> bias_checks();
std::vector<CheckRow> variance_checks(const ValidationOptions& options);
std::vector<CheckRow> boundary_checks();
std::vector<CheckRow> boundary_variance_checks(const ValidationOptions& options);
std::vector<CheckRow> clt_checks(const ValidationOptions& options);
std::vector<CheckRow> skellam_checks(const ValidationOptions& options);
std::vector<CheckRow> deficiency_checks();

void write_check_rows(std::ostream& out, std::span<const CheckRow> rows, bool header = true);

// Estimator value at one point, using one sorted sweep per coordinate.
double sm_estimate_fast(const Sample& sample, const SmoothingVector& m, std::span<const double> x);

// Monte Carlo draws of the estimator at x for several smoothing vectors, one
// fresh sample per replication. Result is row-major reps x ms.size().
// Deterministic in (seed, tag) regardless of the thread count.
std::vector<double> mc_point_estimates(const DistributionModel& model, std::span<const double> x,
                                       std::size_t n, std::span<const SmoothingVector> ms,
                                       std::size_t reps, std::uint64_t seed,
                                       const std::string& tag, unsigned threads);

// Kolmogorov-Smirnov distance between a sample and the standard normal.
double ks_statistic_normal(std::vector<double> z);
// Asymptotic critical value at level alpha (Stephens' finite-n correction).
double ks_critical_value(std::size_t n, double alpha);

// Ordinary least squares y = a + b t; returns b.
double ols_slope(std::span<const double> t, std::span<const double> y);

}  // namespace szm
