#include "szm/qmc.hpp"

#include <array>
#include <cmath>

#include "szm/error.hpp"
#include "szm/rng.hpp"

namespace szm {
namespace {

struct DirectionEntry {
  unsigned degree;
  unsigned coeffs;
  std::array<std::uint32_t, 5> m;
};

// Joe & Kuo (2008) new-joe-kuo-6.21201, dimensions 2..10.
constexpr std::array<DirectionEntry, 9> kDirections{{
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
    {4, 4, {1, 3, 5, 13, 0}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
}};

constexpr unsigned kBits = 32;

std::array<std::uint32_t, kBits> direction_numbers(std::size_t dim) {
  std::array<std::uint32_t, kBits> v{};
  if (dim == 0) {
    for (unsigned k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
    return v;
  }
  const auto& e = kDirections[dim - 1];
  const unsigned s = e.degree;
  for (unsigned k = 0; k < s; ++k) v[k] = e.m[k] << (kBits - 1 - k);
  for (unsigned k = s; k < kBits; ++k) {
    std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
    for (unsigned l = 1; l < s; ++l) {
      if ((e.coeffs >> (s - 1 - l)) & 1u) value ^= v[k - l];
    }
    v[k] = value;
  }
  return v;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += static_cast<double>(index % base) * f;
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (const unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

}  // namespace

QmcKind parse_qmc_kind(const std::string& name) {
  if (name == "sobol") return QmcKind::sobol;
  if (name == "halton") return QmcKind::halton;
  throw UsageError("unsupported qmc kind '" + name + "' (expected sobol or halton)");
}

std::string to_string(QmcKind kind) { return kind == QmcKind::sobol ? "sobol" : "halton"; }

IntegrationRegion::IntegrationRegion(double delta, std::size_t d) : delta_(delta), d_(d) {
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw UsageError("region: delta must lie in (0, 1)");
  if (d_ == 0) throw UsageError("region: dimension must be positive");
}

double IntegrationRegion::volume() const {
  return std::pow(upper() - lower(), static_cast<double>(d_));
}

std::vector<double> sobol_points(std::size_t count, std::size_t d,
                                 std::optional<std::uint64_t> scramble_seed) {
  if (d == 0 || d > kDirections.size() + 1) {
    throw UsageError("sobol: supported dimensions are 1.." + std::to_string(kDirections.size() + 1));
  }
  std::vector<std::array<std::uint32_t, kBits>> dirs;
  std::vector<std::uint32_t> shift(d, 0);
  for (std::size_t j = 0; j < d; ++j) dirs.push_back(direction_numbers(j));
  if (scramble_seed) {
    CounterRng rng(*scramble_seed);
    for (auto& s : shift) s = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
  std::vector<double> out(count * d);
  std::vector<std::uint32_t> state(d, 0);
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) {
      // Gray-code update: flip the direction of the lowest zero bit of i - 1.
      unsigned c = 0;
      for (std::size_t v = i - 1; v & 1u; v >>= 1) ++c;
      if (c >= kBits) throw UsageError("sobol: too many points");
      for (std::size_t j = 0; j < d; ++j) state[j] ^= dirs[j][c];
    }
    for (std::size_t j = 0; j < d; ++j) {
      out[i * d + j] = static_cast<double>(state[j] ^ shift[j]) * 0x1.0p-32;
    }
  }
  return out;
}

std::vector<double> halton_points(std::size_t count, std::size_t d,
                                  std::optional<std::uint64_t> scramble_seed) {
  if (d == 0) throw UsageError("halton: dimension must be positive");
  const auto primes = first_primes(d);
  std::vector<double> shift(d, 0.0);
  if (scramble_seed) {
    CounterRng rng(*scramble_seed);
    for (auto& s : shift) s = rng.uniform();
  }
  std::vector<double> out(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double u = radical_inverse(i, primes[j]) + shift[j];
      if (u >= 1.0) u -= 1.0;
      out[i * d + j] = u;
    }
  }
  return out;
}

EvaluationGrid::EvaluationGrid(IntegrationRegion region, std::vector<double> points)
    : region_(region), g_(points.size() / region.dim()), points_(std::move(points)) {
  if (g_ == 0 || points_.size() != g_ * region_.dim()) {
    throw UsageError("grid: point block must be a nonempty multiple of d");
  }
  cell_weight_ = region_.volume() / static_cast<double>(g_);
}

double EvaluationGrid::integrate(std::span<const double> values) const {
  if (values.size() != g_) throw UsageError("grid integrate: value count mismatch");
  return cell_weight_ * pairwise_sum(values);
}

double EvaluationGrid::integrate(const std::function<double(std::span<const double>)>& f) const {
  std::vector<double> values(g_);
  for (std::size_t g = 0; g < g_; ++g) values[g] = f(point(g));
  return integrate(values);
}

EvaluationGrid qmc_grid(const IntegrationRegion& region, std::size_t count, QmcKind kind,
                        std::optional<std::uint64_t> scramble_seed) {
  if (count == 0) throw UsageError("qmc_grid: G must be positive");
  auto u = kind == QmcKind::sobol ? sobol_points(count, region.dim(), scramble_seed)
                                  : halton_points(count, region.dim(), scramble_seed);
  const double lo = region.lower();
  const double width = region.upper() - region.lower();
  for (auto& v : u) v = lo + width * v;
  return EvaluationGrid(region, std::move(u));
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace szm
