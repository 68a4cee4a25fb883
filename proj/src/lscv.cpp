#include "szm/lscv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "szm/error.hpp"
#include "szm/specialfn.hpp"

namespace szm {

std::int64_t SearchDomain::m_max(std::size_t n) const {
  if (!(c > 0.0) || m_min < 1 || m_cap < 1) {
    throw UsageError("search domain: m_min, m_cap and c must be positive");
  }
  const auto scaled = static_cast<std::int64_t>(std::floor(c * std::cbrt(static_cast<double>(n) * n)));
  return std::min({scaled, m_cap, static_cast<std::int64_t>(n)});
}

double ise(std::span<const double> estimate, std::span<const double> truth,
           const EvaluationGrid& grid) {
  if (estimate.size() != grid.size() || truth.size() != grid.size()) {
    throw UsageError("ise: value count does not match grid size");
  }
  std::vector<double> sq(grid.size());
  for (std::size_t g = 0; g < sq.size(); ++g) {
    const double e = estimate[g] - truth[g];
    sq[g] = e * e;
  }
  return grid.integrate(sq);
}

double ise(const std::function<double(std::span<const double>)>& estimate,
           const DistributionModel& model, const EvaluationGrid& grid) {
  std::vector<double> est(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) est[g] = estimate(grid.point(g));
  return ise(est, cdf_on_grid(model, grid), grid);
}

std::vector<double> cdf_on_grid(const DistributionModel& model, const EvaluationGrid& grid) {
  if (model.dim() != grid.dim()) throw UsageError("cdf_on_grid: dimension mismatch");
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) out[g] = model.cdf(grid.point(g));
  return out;
}

LscvEvaluator::LscvEvaluator(const Sample& sample, const EvaluationGrid& grid)
    : sample_(&sample),
      grid_(&grid),
      n_(sample.size()),
      d_(sample.dim()),
      g_(grid.size()),
      below_(g_ * n_, 0.0),
      below_count_(g_, 0.0),
      order_(d_),
      cache_(d_, std::vector<TailMatrix>(2)),
      next_slot_(d_, 0) {
  if (grid.dim() != d_) throw UsageError("lscv: grid and sample dimensions differ");
  for (std::size_t g = 0; g < g_; ++g) {
    const auto x = grid.point(g);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto r = sample.row(i);
      bool below = true;
      for (std::size_t j = 0; j < d_ && below; ++j) below = r[j] <= x[j];
      below_[g * n_ + i] = below ? 1.0 : 0.0;
      count += below ? 1 : 0;
    }
    below_count_[g] = static_cast<double>(count);
  }
  for (std::size_t j = 0; j < d_; ++j) {
    auto& ord = order_[j];
    ord.resize(n_);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return sample(a, j) < sample(b, j); });
  }
}

void LscvEvaluator::build_tails(std::size_t j, std::int64_t m, std::vector<double>& out) const {
  const auto& ord = order_[j];
  const double mm = static_cast<double>(m);
  // Distinct thresholds in ascending order and, per observation, its slot.
  std::vector<std::int64_t> thresholds;
  std::vector<std::size_t> slot(n_);
  thresholds.reserve(n_);
  for (const std::size_t i : ord) {
    const std::int64_t w = snapped_ceil(mm, (*sample_)(i, j));
    if (thresholds.empty() || thresholds.back() != w) thresholds.push_back(w);
    slot[i] = thresholds.size() - 1;
  }
  std::vector<double> row(thresholds.size());
  out.resize(g_ * n_);
  for (std::size_t g = 0; g < g_; ++g) {
    poisson_tail_sorted(mm * grid_->point(g)[j], thresholds, row);
    double* dst = out.data() + g * n_;
    for (std::size_t i = 0; i < n_; ++i) dst[i] = row[slot[i]];
  }
}

const std::vector<double>& LscvEvaluator::tails(std::size_t j, std::int64_t m) {
  for (auto& entry : cache_[j]) {
    if (entry.m == m) return entry.values;
  }
  auto& entry = cache_[j][next_slot_[j]];
  next_slot_[j] = (next_slot_[j] + 1) % cache_[j].size();
  entry.m = 0;
  build_tails(j, m, entry.values);
  entry.m = m;
  return entry.values;
}

void LscvEvaluator::weight_sums(const SmoothingVector& m, std::vector<double>& s,
                                std::vector<double>* q) {
  if (m.dim() != d_) throw UsageError("lscv: smoothing vector dimension mismatch");
  std::vector<const double*> cols(d_);
  for (std::size_t j = 0; j < d_; ++j) cols[j] = tails(j, m[j]).data();
  s.assign(g_, 0.0);
  if (q) q->assign(g_, 0.0);
  std::vector<double> psi(n_);
  for (std::size_t g = 0; g < g_; ++g) {
    const std::size_t off = g * n_;
    std::copy_n(cols[0] + off, n_, psi.begin());
    for (std::size_t j = 1; j < d_; ++j) {
      const double* t = cols[j] + off;
      for (std::size_t i = 0; i < n_; ++i) psi[i] *= t[i];
    }
    // Four interleaved accumulators; fixed order, so results are reproducible.
    double sum[4] = {0.0, 0.0, 0.0, 0.0};
    double sum_below[4] = {0.0, 0.0, 0.0, 0.0};
    const double* ind = below_.data() + off;
    std::size_t i = 0;
    for (; i + 4 <= n_; i += 4) {
      for (std::size_t k = 0; k < 4; ++k) {
        sum[k] += psi[i + k];
        sum_below[k] += psi[i + k] * ind[i + k];
      }
    }
    for (; i < n_; ++i) {
      sum[0] += psi[i];
      sum_below[0] += psi[i] * ind[i];
    }
    s[g] = (sum[0] + sum[1]) + (sum[2] + sum[3]);
    if (q) (*q)[g] = (sum_below[0] + sum_below[1]) + (sum_below[2] + sum_below[3]);
  }
}

double LscvEvaluator::score(const SmoothingVector& m) {
  if (n_ < 2) throw UsageError("lscv: at least two observations are required");
  const std::vector<std::int64_t> key(m.values().begin(), m.values().end());
  if (const auto it = memo_.find(key); it != memo_.end()) return it->second;

  std::vector<double> s;
  std::vector<double> q;
  weight_sums(m, s, &q);
  const double n = static_cast<double>(n_);
  std::vector<double> sq(g_);
  std::vector<double> cross(g_);
  for (std::size_t g = 0; g < g_; ++g) {
    const double f = s[g] / n;
    sq[g] = f * f;
    // sum_i F^{(-i)}(x_g) 1{X_i <= x_g} = (S_g N_g - Q_g) / (n - 1)
    cross[g] = (s[g] * below_count_[g] - q[g]) / (n - 1.0);
  }
  const double value = grid_->integrate(sq) - 2.0 / n * grid_->integrate(cross);
  memo_.emplace(key, value);
  return value;
}

std::vector<double> LscvEvaluator::estimate_on_grid(const SmoothingVector& m) {
  std::vector<double> s;
  weight_sums(m, s, nullptr);
  for (auto& v : s) v /= static_cast<double>(n_);
  return s;
}

std::vector<double> LscvEvaluator::empirical_on_grid() const {
  std::vector<double> out(below_count_);
  for (auto& v : out) v /= static_cast<double>(n_);
  return out;
}

double lscv_score(const Sample& sample, const SmoothingVector& m, const EvaluationGrid& grid) {
  LscvEvaluator evaluator(sample, grid);
  return evaluator.score(m);
}

LscvSelection select_m(LscvEvaluator& evaluator, std::size_t n, std::size_t d,
                       const SearchDomain& domain, int passes) {
  if (n < 2) throw UsageError("select_m: at least two observations are required");
  if (passes < 0) throw UsageError("select_m: passes must be nonnegative");
  const std::int64_t lo = domain.m_min;
  const std::int64_t hi = domain.m_max(n);
  if (hi < lo) {
    throw UsageError("select_m: empty search range {" + std::to_string(lo) + ", ..., " +
                     std::to_string(hi) + "} for n = " + std::to_string(n));
  }
  std::vector<LscvStep> trace;

  std::int64_t pilot = lo;
  double best = 0.0;
  for (std::int64_t m = lo; m <= hi; ++m) {
    auto mv = SmoothingVector::isotropic(m, d);
    const double s = evaluator.score(mv);
    trace.push_back({0, -1, mv, s});
    if (m == lo || s < best) {
      best = s;
      pilot = m;
    }
  }

  auto current = SmoothingVector::isotropic(pilot, d);
  for (int t = 1; t <= passes; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      std::int64_t arg = lo;
      double coord_best = 0.0;
      for (std::int64_t m = lo; m <= hi; ++m) {
        auto mv = current.with(j, m);
        const double s = evaluator.score(mv);
        trace.push_back({t, static_cast<int>(j), mv, s});
        if (m == lo || s < coord_best) {
          coord_best = s;
          arg = m;
        }
      }
      current = current.with(j, arg);
      best = coord_best;
    }
  }
  return {current, best, std::move(trace)};
}

LscvSelection select_m(const Sample& sample, const EvaluationGrid& grid,
                       const SearchDomain& domain, int passes) {
  LscvEvaluator evaluator(sample, grid);
  return select_m(evaluator, sample.size(), sample.dim(), domain, passes);
}

}  // namespace szm
