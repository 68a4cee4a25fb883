#include "szm/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "szm/error.hpp"
#include "szm/qmc.hpp"
#include "szm/rng.hpp"
#include "szm/simharness.hpp"
#include "szm/specialfn.hpp"
#include "szm/theory.hpp"

namespace szm {
namespace {

const std::vector<std::string> kSuites = {"bias", "variance", "boundary", "clt", "skellam",
                                          "deficiency", "boundary-variance"};

constexpr double kOperatorEps = 1e-12;

std::uint64_t tag_hash(const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t scaled(std::size_t reps, double scale) {
  return std::max<std::size_t>(20, static_cast<std::size_t>(std::llround(reps * scale)));
}

std::string point_label(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t j = 0; j < x.size(); ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x[j]);
    s += (j ? ";" : "") + std::string(buf);
  }
  return s + ")";
}

// Mean and variance of a column, plus the standard error of the variance
// estimate from the fourth central moment.
struct ColumnMoments {
  double mean;
  double var;
  double var_se;
};

ColumnMoments column_moments(std::span<const double> values, std::size_t stride, std::size_t col,
                             double scale) {
  const std::size_t r = values.size() / stride;
  std::vector<double> y(r);
  for (std::size_t i = 0; i < r; ++i) y[i] = scale * values[i * stride + col];
  const double mean = pairwise_sum(y) / static_cast<double>(r);
  std::vector<double> d2(r), d4(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double e = y[i] - mean;
    d2[i] = e * e;
    d4[i] = e * e * e * e;
  }
  const double var = pairwise_sum(d2) / static_cast<double>(r - 1);
  const double mu4 = pairwise_sum(d4) / static_cast<double>(r);
  const double m2 = var * (r - 1) / static_cast<double>(r);
  return {mean, var, std::sqrt(std::max(0.0, mu4 - m2 * m2) / static_cast<double>(r))};
}

// std::poisson_distribution needs a UniformRandomBitGenerator.
struct Urbg {
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return rng.next_u64(); }
  CounterRng rng;
};

}  // namespace

std::span<const std::string> validation_suites() { return kSuites; }

std::vector<CheckRow> run_suite(const std::string& suite, const ValidationOptions& options) {
  if (suite == "bias") return bias_checks();
  if (suite == "variance") return variance_checks(options);
  if (suite == "boundary") return boundary_checks();
  if (suite == "boundary-variance") return boundary_variance_checks(options);
  if (suite == "clt") return clt_checks(options);
  if (suite == "skellam") return skellam_checks(options);
  if (suite == "deficiency") return deficiency_checks();
  throw UsageError("unknown validation suite '" + suite + "'");
}

double sm_estimate_fast(const Sample& sample, const SmoothingVector& m, std::span<const double> x) {
  const std::size_t n = sample.size(), d = sample.dim();
  if (x.size() != d || m.dim() != d) throw UsageError("dimension mismatch");
  std::vector<double> psi(n, 1.0);
  std::vector<std::pair<std::int64_t, std::size_t>> w(n);
  std::vector<std::int64_t> thresholds(n);
  std::vector<double> tails(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) w[i] = {snapped_ceil(static_cast<double>(m[j]), sample(i, j)), i};
    std::sort(w.begin(), w.end());
    for (std::size_t i = 0; i < n; ++i) thresholds[i] = w[i].first;
    poisson_tail_sorted(static_cast<double>(m[j]) * x[j], thresholds, tails);
    for (std::size_t i = 0; i < n; ++i) psi[w[i].second] *= tails[i];
  }
  return pairwise_sum(psi) / static_cast<double>(n);
}

std::vector<double> mc_point_estimates(const DistributionModel& model, std::span<const double> x,
                                       std::size_t n, std::span<const SmoothingVector> ms,
                                       std::size_t reps, std::uint64_t seed,
                                       const std::string& tag, unsigned threads) {
  const std::size_t k = ms.size();
  std::vector<double> out(reps * k);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  const std::uint64_t h = tag_hash(tag);
  const auto worker = [&] {
    try {
      for (std::size_t r; (r = next.fetch_add(1)) < reps;) {
        const auto sample = model.sample(mix_seed({seed, h, static_cast<std::uint64_t>(r)}), n);
        for (std::size_t c = 0; c < k; ++c) out[r * k + c] = sm_estimate_fast(sample, ms[c], x);
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      next.store(reps);
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(reps)));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double ks_statistic_normal(std::vector<double> z) {
  if (z.empty()) throw UsageError("ks: empty sample");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = 0.5 * std::erfc(-z[i] / std::numbers::sqrt2);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double s = std::sqrt(static_cast<double>(n));
  return c / (s + 0.12 + 0.11 / s);
}

double ols_slope(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sty += (t[i] - mt) * (y[i] - my);
    stt += (t[i] - mt) * (t[i] - mt);
  }
  return sty / stt;
}

std::vector<CheckRow> bias_checks() {
  const std::vector<std::int64_t> grid = {32, 64, 128, 256};
  const std::vector<std::vector<double>> points1 = {{0.5}, {1.0}, {2.0}, {3.5}};
  const std::vector<std::vector<double>> points2 = {{1.0, 1.0}, {2.0, 2.0}, {0.5, 2.0}, {3.0, 1.5}};
  std::vector<CheckRow> rows;
  for (const std::string model_name : {"m1", "m2"}) {
    for (const std::size_t d : {1u, 2u}) {
      const auto model = make_model(model_name, {{"d", static_cast<double>(d)}});
      const auto cdf = model->cdf_function();
      for (const auto& x : d == 1 ? points1 : points2) {
        const double f = model->cdf(x);
        const std::string base = "bias:" + model_name + ":d" + std::to_string(d) + ":x=" + point_label(x);
        std::vector<double> scaled_residual;
        for (const auto mv : grid) {
          const auto m = SmoothingVector::isotropic(mv, d);
          const double predicted = interior_bias(*model, m, x);
          const double observed = smoothed_operator(cdf, m, x, kOperatorEps) - f;
          scaled_residual.push_back(std::abs(observed - predicted) * static_cast<double>(mv));
          if (std::abs(predicted) <= 1e-6) continue;
          // The leading term's relative error is O(1/m): 25% at the largest m.
          const double tol = 0.25 * std::abs(predicted) * static_cast<double>(grid.back()) / mv;
          rows.push_back({base + ":m=" + std::to_string(mv), predicted, observed, tol,
                          std::abs(observed - predicted) <= tol});
        }
        // m |F_m - F - bias| must shrink between the smallest and largest m.
        const double first = scaled_residual.front(), last = scaled_residual.back();
        rows.push_back({base + ":scaled_residual", first, last, first,
                        last < first || last < 1e-8});
      }
    }
  }
  return rows;
}

std::vector<CheckRow> variance_checks(const ValidationOptions& options) {
  const std::size_t n = 200;
  const std::size_t reps = scaled(20000, options.reps_scale);
  std::vector<CheckRow> rows;
  struct Case {
    std::string model;
    std::size_t d;
    std::vector<double> x;
  };
  const std::vector<Case> cases = {{"m1", 1, {1.0}}, {"m2", 2, {1.0, 1.0}}};
  for (const auto& c : cases) {
    const auto model = make_model(c.model, {{"d", static_cast<double>(c.d)}});
    const std::vector<SmoothingVector> ms = {SmoothingVector::isotropic(25, c.d),
                                             SmoothingVector::isotropic(100, c.d),
                                             SmoothingVector::isotropic(400, c.d)};
    const auto est = mc_point_estimates(*model, c.x, n, ms, reps, options.seed,
                                        "variance:" + c.model, options.threads);
    const auto e = interior_expansion(*model, c.x);
    const std::string base = "variance:" + c.model + ":d" + std::to_string(c.d) + ":x=" + point_label(c.x);
    std::vector<double> t, y;
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const auto mom = column_moments(est, ms.size(), k, std::sqrt(static_cast<double>(n)));
      const double predicted = e.sigma2 - variance_reduction(*model, ms[k], c.x);
      rows.push_back({base + ":m=" + std::to_string(ms[k][0]) + ":n_var", predicted, mom.var,
                      3.0 * mom.var_se, std::abs(mom.var - predicted) <= 3.0 * mom.var_se});
      t.push_back(1.0 / std::sqrt(static_cast<double>(ms[k][0])));
      y.push_back(mom.var);
    }
    const double slope = ols_slope(t, y);
    const double predicted = -e.V;
    rows.push_back({base + ":slope", predicted, slope, 0.2 * std::abs(predicted),
                    std::abs(slope - predicted) <= 0.2 * std::abs(predicted)});
  }
  return rows;
}

std::vector<CheckRow> boundary_checks() {
  const double lambda = 2.0;
  const std::vector<std::int64_t> grid = {20, 40, 80, 160};
  const ExponentialModel model(1);
  const auto cdf = model.cdf_function();
  const std::vector<double> lam = {lambda};
  std::vector<CheckRow> rows;
  std::vector<double> logm, logb;
  for (const auto mv : grid) {
    const SmoothingVector m({mv});
    const auto x = boundary_point(m, lam);
    const double observed = smoothed_operator(cdf, m, x, kOperatorEps) - model.cdf(x);
    const double predicted = boundary_bias(model, m, lam);
    const double tol = 0.25 * std::abs(predicted);
    rows.push_back({"boundary:exp:lambda=2:m=" + std::to_string(mv), predicted, observed, tol,
                    std::abs(observed - predicted) <= tol});
    logm.push_back(std::log(static_cast<double>(mv)));
    logb.push_back(std::log(std::abs(observed)));
  }
  const double slope = ols_slope(logm, logb);
  rows.push_back({"boundary:exp:lambda=2:loglog_slope", -2.0, slope, 0.15,
                  std::abs(slope + 2.0) <= 0.15});
  // Every boundary quantity vanishes at the corner.
  const SmoothingVector m({40});
  const std::vector<double> zero = {0.0};
  rows.push_back({"boundary:exp:lambda=0:bias", 0.0, boundary_bias(model, m, zero), 0.0,
                  boundary_bias(model, m, zero) == 0.0});
  return rows;
}

std::vector<CheckRow> boundary_variance_checks(const ValidationOptions& options) {
  const double lambda = 2.0;
  const std::size_t n = 500;
  const std::size_t reps = scaled(20000, options.reps_scale);
  const ExponentialModel model(1);
  const std::vector<double> lam = {lambda};
  std::vector<CheckRow> rows;
  std::vector<double> ratios;
  for (const std::int64_t mv : {50, 200}) {
    const SmoothingVector m({mv});
    const auto x = boundary_point(m, lam);
    const std::vector<SmoothingVector> ms = {m};
    const auto est = mc_point_estimates(model, x, n, ms, reps, options.seed,
                                        "boundary-variance:" + std::to_string(mv), options.threads);
    const auto mom = column_moments(est, 1, 0, std::sqrt(static_cast<double>(n)));
    const double predicted = static_cast<double>(n) * boundary_variance(model, m, lam, static_cast<double>(n));
    rows.push_back({"boundary-variance:exp:lambda=2:m=" + std::to_string(mv) + ":n_var", predicted,
                    mom.var, 3.0 * mom.var_se, std::abs(mom.var - predicted) <= 3.0 * mom.var_se});
    ratios.push_back(mom.var / predicted);
  }
  const double change = std::abs(ratios[1] / ratios[0] - 1.0);
  rows.push_back({"boundary-variance:exp:lambda=2:relative_change", 0.0, change, 0.15, change < 0.15});
  return rows;
}

std::vector<CheckRow> clt_checks(const ValidationOptions& options) {
  const std::size_t n = 400;
  const std::size_t reps = scaled(2000, options.reps_scale);
  const IndependentGammaModel model(2);
  const std::vector<double> x = {1.0, 1.0};
  const std::vector<SmoothingVector> ms = {SmoothingVector::isotropic(15, 2)};
  const auto est = mc_point_estimates(model, x, n, ms, reps, options.seed, "clt", options.threads);
  const double mean = smoothed_operator(model.cdf_function(), ms[0], x, kOperatorEps);
  const auto e = interior_expansion(model, x);
  const double sd = std::sqrt(e.sigma2 - variance_reduction(model, ms[0], x));
  std::vector<double> z(reps);
  for (std::size_t r = 0; r < reps; ++r) z[r] = std::sqrt(static_cast<double>(n)) * (est[r] - mean) / sd;
  const double ks = ks_statistic_normal(z);
  const double crit = ks_critical_value(reps, 0.01);
  return {{"clt:m1:d2:x=(1;1):n=400:m=15:ks", 0.0, ks, crit, ks <= crit}};
}

std::vector<CheckRow> skellam_checks(const ValidationOptions& options) {
  const std::size_t reps = scaled(100000, options.reps_scale);
  std::vector<CheckRow> rows;
  for (const double lambda : {25.0, 100.0, 400.0}) {
    Urbg gen{CounterRng(mix_seed({options.seed, tag_hash("skellam"), static_cast<std::uint64_t>(lambda)}))};
    std::poisson_distribution<long long> poi(lambda);
    std::vector<double> v(reps);
    for (auto& a : v) a = static_cast<double>(std::llabs(poi(gen) - poi(gen)));
    const double mean = pairwise_sum(v) / static_cast<double>(reps);
    std::vector<double> d2(reps);
    for (std::size_t i = 0; i < reps; ++i) d2[i] = (v[i] - mean) * (v[i] - mean);
    const double se = std::sqrt(pairwise_sum(d2) / static_cast<double>(reps - 1) / static_cast<double>(reps));
    const double predicted = std::sqrt(2.0 / std::numbers::pi) * std::sqrt(2.0 * lambda);
    char name[64];
    std::snprintf(name, sizeof name, "skellam:lambda=%g", lambda);
    rows.push_back({name, predicted, mean, 3.0 * se, std::abs(mean - predicted) <= 3.0 * se});
  }
  return rows;
}

std::vector<CheckRow> deficiency_checks() {
  // Interior point with V > 0 and B != 0.
  const IndependentGammaModel model(2);
  const std::vector<double> x = {2.0, 2.0};
  const auto e = interior_expansion(model, x);
  const double c_opt = std::pow(4.0 * e.B * e.B / e.V, 2.0 / 3.0);
  std::vector<CheckRow> rows;
  double previous = 0.0;
  for (const double n : {1e3, 1e4, 1e5}) {
    const double m = c_opt * std::pow(n, 2.0 / 3.0);
    const double excess = static_cast<double>(deficiency_exact(e.sigma2, interior_mse(e, n, m))) - n;
    const double predicted = deficiency_asymptotic(e, n, Regime::critical, std::nullopt, c_opt);
    char name[64];
    std::snprintf(name, sizeof name, "deficiency:m1:d2:x=(2;2):critical:n=%g", n);
    rows.push_back({name, predicted, excess, 0.0, excess > 0.0 && excess > previous});
    previous = excess;
  }
  for (const double n : {1e2, 1e3, 1e4, 1e5}) {
    const double excess = static_cast<double>(deficiency_exact(e.sigma2, interior_mse(e, n, n))) - n;
    const double predicted = deficiency_asymptotic(e, n, Regime::high, n, std::nullopt);
    char name[64];
    std::snprintf(name, sizeof name, "deficiency:m1:d2:x=(2;2):high:n=%g", n);
    rows.push_back({name, predicted, excess, 0.0, excess > 0.0});
  }
  return rows;
}

void write_check_rows(std::ostream& out, std::span<const CheckRow> rows, bool header) {
  if (header) out << "check,predicted,observed,tolerance,pass\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.6g,%s\n", r.name.c_str(), r.predicted,
                  r.observed, r.tolerance, r.pass ? "pass" : "fail");
    out << buf;
  }
}

}  // namespace szm
