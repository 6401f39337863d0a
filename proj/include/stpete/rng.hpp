#pragma once

// Counter-based stream derivation for reproducible parallel Monte Carlo.
//
// Every replicate i of an experiment owns an engine derived from the pair
// (master_seed, i) alone, so the values it sees do not depend on which worker
// runs it or in what order.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace stpete {

/// SplitMix64 finalizer: a bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** 1.0. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

  /// Engine for replicate `stream` of an experiment seeded with `master`.
  static Xoshiro256 for_stream(std::uint64_t master, std::uint64_t stream) noexcept {
    Xoshiro256 e;
    std::uint64_t key = mix64(master ^ 0x5851f42d4c957f2dULL);
    std::uint64_t ctr = mix64(stream + 0x14057b7ef767814fULL) ^ key;
    for (auto& w : e.s_) {
      ctr += 0x9e3779b97f4a7c15ULL;
      w = mix64(ctr ^ key);
    }
    if ((e.s_[0] | e.s_[1] | e.s_[2] | e.s_[3]) == 0) e.s_[0] = 1;
    return e;
  }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      w = mix64(x);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Uniform double in (0, 1): 53 random bits, never exactly 0.
template <class Engine>
double uniform_open01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard exponential variate by inversion.
template <class Engine>
double exponential1(Engine& eng) {
  return -std::log(uniform_open01(eng));
}

/// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
template <class Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>(eng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(eng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace stpete
