#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace szm {

// n x d matrix of nonnegative finite observations, stored row-major.
class Sample {
 public:
  Sample(std::size_t n, std::size_t d, std::vector<double> values);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * d_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
  std::span<const double> values() const { return values_; }

  // Copy without observation i.
  Sample without(std::size_t i) const;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> values_;
};

// Delimited text: one observation per row, comma and/or whitespace separated,
// optional header row (detected by a non-numeric first token), '#' comments.
Sample read_sample(std::istream& in, std::string_view source_name);
Sample load_sample(const std::filesystem::path& path);

class SmoothingVector {
 public:
  explicit SmoothingVector(std::vector<std::int64_t> m);
  static SmoothingVector isotropic(std::int64_t m, std::size_t d);

  std::size_t dim() const { return m_.size(); }
  std::int64_t operator[](std::size_t j) const { return m_[j]; }
  std::int64_t min() const;
  std::int64_t max() const;
  std::span<const std::int64_t> values() const { return m_; }

  SmoothingVector with(std::size_t j, std::int64_t value) const;

  friend bool operator==(const SmoothingVector&, const SmoothingVector&) = default;

 private:
  std::vector<std::int64_t> m_;
};

// ceil(m * x), snapping products within 1e-9 of an integer onto it first.
// Positive x always maps to at least 1.
std::int64_t snapped_ceil(double m, double x);

// W_ij = ceil(m_j X_ij) for one (sample, m) pair.
class CeilCache {
 public:
  CeilCache(const Sample& sample, const SmoothingVector& m);

  std::int64_t operator()(std::size_t i, std::size_t j) const { return w_[i * d_ + j]; }
  std::span<const std::int64_t> row(std::size_t i) const { return {w_.data() + i * d_, d_}; }

 private:
  std::size_t d_;
  std::vector<std::int64_t> w_;
};

double empirical_cdf(const Sample& sample, std::span<const double> x);

// Szasz-Mirakyan estimator bound to one sample and smoothing vector. Holds a
// reference to the sample, which must outlive it.
class SmEstimator {
 public:
  SmEstimator(const Sample& sample, SmoothingVector m);

  const Sample& sample() const { return *sample_; }
  const SmoothingVector& smoothing() const { return m_; }
  const CeilCache& ceil_cache() const { return cache_; }

  // psi_i(x) = prod_j P(Poi(m_j x_j) >= W_ij)
  double weight(std::size_t i, std::span<const double> x) const;
  double estimate(std::span<const double> x) const;
  double loo_estimate(std::size_t i, std::span<const double> x) const;

  // points is a row-major G x d block.
  std::vector<double> estimate_many(std::span<const double> points) const;

 private:
  void check_point(std::span<const double> x) const;

  const Sample* sample_;
  SmoothingVector m_;
  CeilCache cache_;
};

double sm_weight(std::size_t i, const Sample& sample, const SmoothingVector& m,
                 std::span<const double> x);
double sm_estimate(const Sample& sample, const SmoothingVector& m, std::span<const double> x);
double loo_estimate(std::size_t i, const Sample& sample, const SmoothingVector& m,
                    std::span<const double> x);

using CdfFunction = std::function<double(std::span<const double>)>;

// Lattice-series form sum_k F(k/m) P_{k,m}(x), truncated per coordinate to
// the window where the Poisson tail bound is <= tail_eps / d.
double smoothed_operator(const CdfFunction& cdf, const SmoothingVector& m,
                         std::span<const double> x, double tail_eps);

// Series form of the estimator with F = empirical cdf. Exponential in d;
// reference implementation for tests.
double sm_estimate_series(const Sample& sample, const SmoothingVector& m,
                          std::span<const double> x, double tail_eps);

}  // namespace szm
