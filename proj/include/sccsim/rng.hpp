#pragma once

// Counter-based per-shot random streams.
//
// Every shot gets its own generator seeded from (master seed, stream, shot
// index) through a SplitMix64 mixing chain, so the draws of a shot never
// depend on which thread ran it or in what order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace sccsim {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mixes a key tuple into a single 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ stream;
  h = splitmix64(s);
  s = h ^ index;
  return splitmix64(s);
}

/// xoshiro256** satisfying UniformRandomBitGenerator.
class ShotRng {
 public:
  using result_type = std::uint64_t;

  explicit ShotRng(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }
  ShotRng(std::uint64_t master, std::uint64_t stream, std::uint64_t index)
      : ShotRng(derive_seed(master, stream, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform in (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  /// Exp(rate) waiting time; rate must be > 0.
  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4]{};
};

/// Poisson variate; zero for a nonpositive mean.
inline std::uint64_t poisson(ShotRng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

}  // namespace sccsim
