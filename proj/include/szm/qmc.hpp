#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace szm {

enum class QmcKind { sobol, halton };

QmcKind parse_qmc_kind(const std::string& name);
std::string to_string(QmcKind kind);

// S_delta = [delta, 1/delta)^d.
class IntegrationRegion {
 public:
  IntegrationRegion(double delta, std::size_t d);

  double delta() const { return delta_; }
  std::size_t dim() const { return d_; }
  double lower() const { return delta_; }
  double upper() const { return 1.0 / delta_; }
  double volume() const;

 private:
  double delta_;
  std::size_t d_;
};

// Unit-cube low-discrepancy points, row-major count x d. Sobol uses Joe-Kuo
// direction numbers (d <= 10) and starts at the origin; Halton uses the first
// d primes as bases. With a scramble seed, Sobol gets a random digital shift
// and Halton a random shift modulo 1.
std::vector<double> sobol_points(std::size_t count, std::size_t d,
                                 std::optional<std::uint64_t> scramble_seed = std::nullopt);
std::vector<double> halton_points(std::size_t count, std::size_t d,
                                  std::optional<std::uint64_t> scramble_seed = std::nullopt);

class EvaluationGrid {
 public:
  EvaluationGrid(IntegrationRegion region, std::vector<double> points);

  const IntegrationRegion& region() const { return region_; }
  std::size_t size() const { return g_; }
  std::size_t dim() const { return region_.dim(); }
  double cell_weight() const { return cell_weight_; }
  std::span<const double> point(std::size_t g) const { return {points_.data() + g * dim(), dim()}; }
  std::span<const double> points() const { return points_; }

  // cell_weight * sum_g values[g], summed pairwise in fixed order.
  double integrate(std::span<const double> values) const;
  double integrate(const std::function<double(std::span<const double>)>& f) const;

 private:
  IntegrationRegion region_;
  std::size_t g_;
  std::vector<double> points_;
  double cell_weight_;
};

EvaluationGrid qmc_grid(const IntegrationRegion& region, std::size_t count, QmcKind kind,
                        std::optional<std::uint64_t> scramble_seed = std::nullopt);

// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace szm
