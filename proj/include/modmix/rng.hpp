#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace modmix {

/// SplitMix64 (Steele, Lea, Flood 2014). Used only to expand a 64-bit seed
/// into generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna), state seeded by four SplitMix64 outputs.
///
/// All derived draws are defined here rather than through <random>
/// distributions, whose output is implementation-specific:
///   uniform()          = (next() >> 11) * 2^-53, in [0, 1)
///   uniform(lo, hi)    = lo + (hi - lo) * uniform()
///   bernoulli(p)       = uniform() < p
///   uniform_index(n)   = Lemire's multiply-shift with rejection, in [0, n)
/// Any port that reproduces these definitions reproduces every mask and
/// dataset byte for byte.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_;
};

/// 64-bit FNV-1a.
std::uint64_t stable_hash(std::string_view text);

/// Per-item seed: root seed XOR stable hash of the item key. Independent of
/// processing order or thread count.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view item) { return root ^ stable_hash(item); }

/// Seed used by every entry point when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20220331;

}  // namespace modmix
