#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "szm/estimators.hpp"
#include "szm/models.hpp"
#include "szm/qmc.hpp"

namespace szm {

// Candidate range {m_min, ..., m_max(n)} with m_max(n) = min(floor(c n^{2/3}), m_cap, n).
struct SearchDomain {
  std::int64_t m_min = 5;
  std::int64_t m_cap = 500;
  double c = 3.0;

  std::int64_t m_max(std::size_t n) const;
};

// cell_weight * sum_g (estimate_g - truth_g)^2
double ise(std::span<const double> estimate, std::span<const double> truth,
           const EvaluationGrid& grid);
double ise(const std::function<double(std::span<const double>)>& estimate,
           const DistributionModel& model, const EvaluationGrid& grid);

// Model cdf at every grid point.
std::vector<double> cdf_on_grid(const DistributionModel& model, const EvaluationGrid& grid);

// Evaluates the QMC-discretized LSCV criterion
//   w sum_g F_m(x_g)^2 - (2/n) sum_i w sum_g F_m^{(-i)}(x_g) 1{X_i <= x_g}
// through the leave-one-out identity F^{(-i)} = (n F - psi_i) / (n - 1).
// Per-coordinate Poisson tail matrices are cached for the most recent m
// values, and scores are memoized per smoothing vector. Holds references to
// the sample and grid.
class LscvEvaluator {
 public:
  LscvEvaluator(const Sample& sample, const EvaluationGrid& grid);

  double score(const SmoothingVector& m);
  // Szasz-Mirakyan estimate at every grid point.
  std::vector<double> estimate_on_grid(const SmoothingVector& m);
  // Empirical cdf at every grid point.
  std::vector<double> empirical_on_grid() const;

  std::size_t evaluations() const { return memo_.size(); }

 private:
  struct TailMatrix {
    std::int64_t m = 0;
    std::vector<double> values;  // G x n, row per grid point
  };

  const std::vector<double>& tails(std::size_t j, std::int64_t m);
  void build_tails(std::size_t j, std::int64_t m, std::vector<double>& out) const;
  // S_g = sum_i psi_i(x_g) and Q_g = sum_i psi_i(x_g) 1{X_i <= x_g}
  void weight_sums(const SmoothingVector& m, std::vector<double>& s, std::vector<double>* q);

  const Sample* sample_;
  const EvaluationGrid* grid_;
  std::size_t n_;
  std::size_t d_;
  std::size_t g_;
  std::vector<double> below_;         // G x n indicator 1{X_i <= x_g}
  std::vector<double> below_count_;   // N_g
  std::vector<std::vector<std::size_t>> order_;  // per coordinate, observations sorted by X_ij
  std::vector<std::vector<TailMatrix>> cache_;   // per coordinate, two slots
  std::vector<std::size_t> next_slot_;
  std::map<std::vector<std::int64_t>, double> memo_;
};

double lscv_score(const Sample& sample, const SmoothingVector& m, const EvaluationGrid& grid);

struct LscvStep {
  int pass;        // 0 for the isotropic pilot
  int coordinate;  // -1 for the isotropic pilot
  SmoothingVector m;
  double score;
};

struct LscvSelection {
  SmoothingVector m_star;
  double score;
  std::vector<LscvStep> trace;
};

// Isotropic pilot over the search range followed by `passes` coordinate
// passes, each coordinate minimized by an exhaustive scan. Ties resolve to the
// smallest m.
LscvSelection select_m(const Sample& sample, const EvaluationGrid& grid,
                       const SearchDomain& domain, int passes = 2);
LscvSelection select_m(LscvEvaluator& evaluator, std::size_t n, std::size_t d,
                       const SearchDomain& domain, int passes = 2);

}  // namespace szm
