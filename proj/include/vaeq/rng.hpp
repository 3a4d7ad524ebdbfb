#pragma once

// Seeded RNG with named substream derivation. Every consumer takes an
// explicit seed; substreams are derived by hashing (seed, tag) so that
// train/test/noise/init draws are independent and trials can run in
// parallel without shared state.
//
// All variates are produced from the raw 64-bit engine output (uniforms
// from the top 53 bits, Gaussians via Box-Muller), so sequences are
// bit-identical across platforms and standard-library versions.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace vaeq {

// Substream tags used across the library.
namespace stream {
inline constexpr std::uint64_t kTrainSymbols = 1;
inline constexpr std::uint64_t kTestSymbols = 2;
inline constexpr std::uint64_t kTrainNoise = 3;
inline constexpr std::uint64_t kTestNoise = 4;
inline constexpr std::uint64_t kDecoderInit = 5;
inline constexpr std::uint64_t kBatchSampler = 6;
}  // namespace stream

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for a named substream of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ splitmix64(~tag));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng substream(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  int bit() { return static_cast<int>(next_u64() >> 63); }

  // Uniform integer in [0, n); n >= 1.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Independent standard normal pair (Box-Muller).
  std::pair<double, double> gaussian_pair() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double gaussian() { return gaussian_pair().first; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace vaeq
