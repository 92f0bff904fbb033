#pragma once

#include <cstdint>
#include <random>

namespace mqbsts {

// Deterministic generator. The raw stream is std::mt19937_64, whose output is
// fixed by the standard, and every derived variate (uniform, normal, gamma,
// Poisson) is computed here rather than by <random> distributions, whose
// algorithms differ between standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal (Marsaglia polar method; caches the second variate).
  double normal();

  // Gamma(shape, scale = 1), Marsaglia–Tsang with the shape < 1 boost.
  double gamma(double shape);

  // Chi-square with real degrees of freedom.
  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

  // Poisson by sequential inversion; fine for the small means used in simulation.
  std::uint64_t poisson(double mean);

  // Independent child stream, e.g. one per chain. Uses SplitMix64 to decorrelate seeds.
  Rng split(std::uint64_t stream) const;

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mqbsts
