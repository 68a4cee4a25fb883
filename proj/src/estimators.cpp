#include "szm/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "szm/error.hpp"
#include "szm/specialfn.hpp"

namespace szm {
namespace {

void check_coordinates(std::span<const double> x, std::size_t d, const char* what) {
  if (x.size() != d) {
    throw UsageError(std::string(what) + ": point has " + std::to_string(x.size()) +
                     " coordinates, expected " + std::to_string(d));
  }
  for (const double v : x) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": coordinate is not finite");
    if (v < 0.0) throw DomainError(std::string(what) + ": coordinate is negative");
  }
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  const auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) {
      // two commas in a row denote an empty field
      if (line[i] == ',' && i + 1 < line.size() && line[i + 1] == ',') out.emplace_back();
      ++i;
    }
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Per-coordinate Poisson weights over the truncation window.
struct AxisWeights {
  std::int64_t first = 0;
  std::vector<double> pmf;
};

AxisWeights axis_weights(double lambda, double eps) {
  AxisWeights w;
  if (lambda == 0.0) {
    w.pmf = {1.0};
    return w;
  }
  const double half = poisson_tail_halfwidth(lambda, eps);
  w.first = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lambda - half)));
  const auto last = static_cast<std::int64_t>(std::ceil(lambda + half));
  w.pmf.reserve(static_cast<std::size_t>(last - w.first + 1));
  for (std::int64_t k = w.first; k <= last; ++k) {
    w.pmf.push_back(poisson_pmf(static_cast<double>(k), lambda));
  }
  return w;
}

template <class Fn>
double lattice_sum(const SmoothingVector& m, std::span<const double> x, double tail_eps,
                   Fn&& value_at) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) {
    throw UsageError("lattice series: tail_eps must lie in (0, 1)");
  }
  const std::size_t d = m.dim();
  check_coordinates(x, d, "lattice series");
  std::vector<AxisWeights> axes;
  axes.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    axes.push_back(axis_weights(static_cast<double>(m[j]) * x[j], tail_eps / static_cast<double>(d)));
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const std::int64_t k = axes[j].first + static_cast<std::int64_t>(idx[j]);
      point[j] = static_cast<double>(k) / static_cast<double>(m[j]);
      weight *= axes[j].pmf[idx[j]];
    }
    if (weight > 0.0) total += weight * value_at(std::span<const double>(point));
    std::size_t j = 0;
    for (; j < d; ++j) {
      if (++idx[j] < axes[j].pmf.size()) break;
      idx[j] = 0;
    }
    if (j == d) break;
  }
  return total;
}

}  // namespace

Sample::Sample(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
  if (n_ == 0 || d_ == 0) throw UsageError("Sample: n and d must be positive");
  if (values_.size() != n_ * d_) throw UsageError("Sample: value count does not match n * d");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("Sample: observation " + std::to_string(k / d_ + 1) +
                        " has a negative or non-finite coordinate");
    }
  }
}

Sample Sample::without(std::size_t i) const {
  if (i >= n_) throw UsageError("Sample::without: index out of range");
  if (n_ == 1) throw UsageError("Sample::without: cannot remove the only observation");
  std::vector<double> v;
  v.reserve((n_ - 1) * d_);
  for (std::size_t r = 0; r < n_; ++r) {
    if (r == i) continue;
    const auto x = row(r);
    v.insert(v.end(), x.begin(), x.end());
  }
  return Sample(n_ - 1, d_, std::move(v));
}

Sample read_sample(std::istream& in, std::string_view source_name) {
  const std::string src(source_name);
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t rows = 0;
  bool first_content = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front().starts_with('#')) continue;
    double probe = 0.0;
    if (first_content) {
      first_content = false;
      if (!parse_double(fields.front(), probe)) continue;  // header
    }
    if (d == 0) d = fields.size();
    if (fields.size() != d) {
      throw IoError(src + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                    " columns, found " + std::to_string(fields.size()));
    }
    for (const auto f : fields) {
      double v = 0.0;
      if (!parse_double(f, v) || !std::isfinite(v)) {
        throw IoError(src + ":" + std::to_string(line_no) + ": malformed number '" +
                      std::string(f) + "'");
      }
      if (v < 0.0) {
        throw DomainError(src + ":" + std::to_string(line_no) + ": negative observation " +
                          std::string(f));
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError(src + ": no observations");
  return Sample(rows, d, std::move(values));
}

Sample load_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path.string());
  return read_sample(in, path.string());
}

SmoothingVector::SmoothingVector(std::vector<std::int64_t> m) : m_(std::move(m)) {
  if (m_.empty()) throw UsageError("SmoothingVector: empty");
  for (const auto v : m_) {
    if (v < 1) throw UsageError("SmoothingVector: every m_j must be >= 1");
  }
}

SmoothingVector SmoothingVector::isotropic(std::int64_t m, std::size_t d) {
  return SmoothingVector(std::vector<std::int64_t>(d, m));
}

std::int64_t SmoothingVector::min() const { return *std::min_element(m_.begin(), m_.end()); }
std::int64_t SmoothingVector::max() const { return *std::max_element(m_.begin(), m_.end()); }

SmoothingVector SmoothingVector::with(std::size_t j, std::int64_t value) const {
  auto copy = m_;
  copy.at(j) = value;
  return SmoothingVector(std::move(copy));
}

std::int64_t snapped_ceil(double m, double x) {
  if (x == 0.0) return 0;
  const double v = m * x;
  const double r = std::nearbyint(v);
  const double c = std::abs(v - r) <= 1e-9 ? r : std::ceil(v);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

CeilCache::CeilCache(const Sample& sample, const SmoothingVector& m) : d_(sample.dim()) {
  if (m.dim() != d_) throw UsageError("CeilCache: smoothing vector dimension mismatch");
  w_.resize(sample.size() * d_);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      w_[i * d_ + j] = snapped_ceil(static_cast<double>(m[j]), sample(i, j));
    }
  }
}

double empirical_cdf(const Sample& sample, std::span<const double> x) {
  check_coordinates(x, sample.dim(), "empirical_cdf");
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto r = sample.row(i);
    bool below = true;
    for (std::size_t j = 0; j < r.size() && below; ++j) below = r[j] <= x[j];
    count += below ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

SmEstimator::SmEstimator(const Sample& sample, SmoothingVector m)
    : sample_(&sample), m_(std::move(m)), cache_(sample, m_) {}

void SmEstimator::check_point(std::span<const double> x) const {
  check_coordinates(x, sample_->dim(), "sm_estimate");
}

double SmEstimator::weight(std::size_t i, std::span<const double> x) const {
  if (i >= sample_->size()) throw UsageError("sm_weight: observation index out of range");
  check_point(x);
  double w = 1.0;
  for (std::size_t j = 0; j < x.size() && w > 0.0; ++j) {
    w *= poisson_tail(static_cast<double>(m_[j]) * x[j], cache_(i, j));
  }
  return w;
}

double SmEstimator::estimate(std::span<const double> x) const {
  check_point(x);
  double total = 0.0;
  for (std::size_t i = 0; i < sample_->size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < x.size() && w > 0.0; ++j) {
      w *= poisson_tail(static_cast<double>(m_[j]) * x[j], cache_(i, j));
    }
    total += w;
  }
  return total / static_cast<double>(sample_->size());
}

double SmEstimator::loo_estimate(std::size_t i, std::span<const double> x) const {
  const std::size_t n = sample_->size();
  if (n < 2) throw UsageError("loo_estimate: leave-one-out needs at least two observations");
  if (i >= n) throw UsageError("loo_estimate: observation index out of range");
  const double nn = static_cast<double>(n);
  return nn / (nn - 1.0) * estimate(x) - weight(i, x) / (nn - 1.0);
}

std::vector<double> SmEstimator::estimate_many(std::span<const double> points) const {
  const std::size_t d = sample_->dim();
  if (points.size() % d != 0) throw UsageError("estimate_many: point block is not a multiple of d");
  std::vector<double> out(points.size() / d);
  for (std::size_t g = 0; g < out.size(); ++g) out[g] = estimate(points.subspan(g * d, d));
  return out;
}

double sm_weight(std::size_t i, const Sample& sample, const SmoothingVector& m,
                 std::span<const double> x) {
  return SmEstimator(sample, m).weight(i, x);
}

double sm_estimate(const Sample& sample, const SmoothingVector& m, std::span<const double> x) {
  return SmEstimator(sample, m).estimate(x);
}

double loo_estimate(std::size_t i, const Sample& sample, const SmoothingVector& m,
                    std::span<const double> x) {
  return SmEstimator(sample, m).loo_estimate(i, x);
}

double smoothed_operator(const CdfFunction& cdf, const SmoothingVector& m,
                         std::span<const double> x, double tail_eps) {
  return lattice_sum(m, x, tail_eps, [&](std::span<const double> p) { return cdf(p); });
}

double sm_estimate_series(const Sample& sample, const SmoothingVector& m,
                          std::span<const double> x, double tail_eps) {
  if (m.dim() != sample.dim()) throw UsageError("sm_estimate_series: dimension mismatch");
  return lattice_sum(m, x, tail_eps,
                     [&](std::span<const double> p) { return empirical_cdf(sample, p); });
}

}  // namespace szm
