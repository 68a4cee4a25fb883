#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "szm/estimators.hpp"

namespace szm {

// True distribution on the nonnegative orthant with analytic partials and a
// seeded sampler. Implementations are immutable.
class DistributionModel {
 public:
  virtual ~DistributionModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double cdf(std::span<const double> x) const = 0;
  // d F / d x_j and d^2 F / d x_j^2. At x_j = 0 the one-sided limit is returned.
  virtual double partial(std::size_t j, std::span<const double> x) const = 0;
  virtual double partial2(std::size_t j, std::span<const double> x) const = 0;
  // Deterministic in (seed, n).
  virtual Sample sample(std::uint64_t seed, std::size_t n) const = 0;

  CdfFunction cdf_function() const;
};

struct Partials {
  double first;
  double second;
};
Partials model_partials(const DistributionModel& model, std::size_t j, std::span<const double> x);

double clayton_cdf(std::span<const double> u, double theta);

// (M1) independent Gamma(alpha, beta) coordinates.
class IndependentGammaModel final : public DistributionModel {
 public:
  IndependentGammaModel(std::size_t d, double alpha = 2.0, double beta = 1.0);

  std::string name() const override { return "m1"; }
  std::size_t dim() const override { return d_; }
  double cdf(std::span<const double> x) const override;
  double partial(std::size_t j, std::span<const double> x) const override;
  double partial2(std::size_t j, std::span<const double> x) const override;
  Sample sample(std::uint64_t seed, std::size_t n) const override;

 private:
  std::size_t d_;
  double alpha_;
  double beta_;
};

// (M2) Clayton(theta) copula with Gamma(alpha, beta) margins, sampled with the
// Marshall-Olkin frailty construction.
class ClaytonGammaModel final : public DistributionModel {
 public:
  ClaytonGammaModel(std::size_t d, double theta = 2.0, double alpha = 2.0, double beta = 1.0);

  std::string name() const override { return "m2"; }
  std::size_t dim() const override { return d_; }
  double cdf(std::span<const double> x) const override;
  double partial(std::size_t j, std::span<const double> x) const override;
  double partial2(std::size_t j, std::span<const double> x) const override;
  Sample sample(std::uint64_t seed, std::size_t n) const override;

  double theta() const { return theta_; }

 private:
  // Copula derivatives with respect to u_j, with their u_j -> 0 limits.
  double copula_d1(std::size_t j, std::span<const double> u) const;
  double copula_d2(std::size_t j, std::span<const double> u) const;

  std::size_t d_;
  double theta_;
  double alpha_;
  double beta_;
};

// Independent Exponential(rate) coordinates. Its second derivative is nonzero
// on the boundary faces, which makes the boundary-layer bias observable.
class ExponentialModel final : public DistributionModel {
 public:
  explicit ExponentialModel(std::size_t d, double rate = 1.0);

  std::string name() const override { return "exp"; }
  std::size_t dim() const override { return d_; }
  double cdf(std::span<const double> x) const override;
  double partial(std::size_t j, std::span<const double> x) const override;
  double partial2(std::size_t j, std::span<const double> x) const override;
  Sample sample(std::uint64_t seed, std::size_t n) const override;

 private:
  std::size_t d_;
  double rate_;
};

// Known keys: d, alpha, beta, theta, rate. Names: m1, m2, exp.
using ModelParams = std::map<std::string, double>;
std::unique_ptr<DistributionModel> make_model(const std::string& name, const ModelParams& params);

}  // namespace szm
