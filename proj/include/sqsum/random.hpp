#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace sqsum {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// All randomness in the simulator flows through this seeded source so a run
// replays bit-for-bit from its seed. Distribution helpers are hand-rolled on
// top of the raw engine words: mt19937_64 output is fixed by the standard,
// while std::uniform_*_distribution is not, and we want the draw sequence to
// be identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n) via masked rejection.
  std::uint64_t uniform_below(std::uint64_t n);

  bool coin() { return (next_u64() & 1ull) != 0; }

  // Uniform angle in [0, 2*pi).
  double uniform_angle();

  // Stream derivation for independent per-trial generators (splitmix64-style
  // finalizer, applied twice so nearby trial indices decorrelate).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

// k distinct indices drawn uniformly from [0, population), returned ascending.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t population, std::size_t k);

}  // namespace sqsum
