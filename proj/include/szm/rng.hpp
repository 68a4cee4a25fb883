#pragma once

#include <cstdint>
#include <initializer_list>

namespace szm {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a tuple of 64-bit values into one seed. Order matters.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

// Counter-based generator: the i-th output is a pure function of (key, i), so
// streams can be split and replayed without shared state. Output i is
// mix64(key + i * golden) passed through a second SplitMix round.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}

  std::uint64_t next_u64() {
    const std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c * 0x9e3779b97f4a7c15ULL));
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential();
  double normal();
  // Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1, boosted with
  // U^{1/shape} for shape < 1.
  double gamma(double shape);

  // Independent child stream.
  CounterRng split(std::uint64_t tag) const { return CounterRng(mix_seed({key_, tag})); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace szm
