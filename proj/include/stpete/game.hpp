#pragma once

// Elementary St. Petersburg distribution objects.
//
// A generalized game (alpha, p) pays q^(-k/alpha) with probability q^(k-1) p,
// q = 1 - p, where k >= 1 is the index of the first success. The classical
// game is (1, 1/2): payoff 2^k with probability 2^-k. For the classical game
// every quantity here is computed exactly from the binary exponent of its
// argument; generalized payoffs are evaluated in long double.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stpete/errors.hpp"
#include "stpete/rng.hpp"

namespace stpete::dist {

class GameParams {
 public:
  constexpr GameParams() = default;

  GameParams(double alpha, double p) : alpha_(alpha), p_(p) {
    detail::require(std::isfinite(alpha) && alpha > 0, "alpha", "must be positive");
    detail::require(p > 0 && p < 1, "p", "must lie in (0, 1)");
  }

  static constexpr GameParams classical() { return GameParams{}; }

  double alpha() const noexcept { return alpha_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return 1.0 - p_; }
  bool is_classical() const noexcept { return alpha_ == 1.0 && p_ == 0.5; }

  /// q^(-k/alpha); 2^k for the classical game.
  long double payoff(int k) const {
    if (is_classical()) return std::ldexp(1.0L, k);
    return std::exp(-static_cast<long double>(k) * std::log(static_cast<long double>(q())) /
                    static_cast<long double>(alpha_));
  }

  /// q^(k-1) p; 2^-k for the classical game.
  long double prob(int k) const {
    if (is_classical()) return std::ldexp(1.0L, -k);
    return std::pow(static_cast<long double>(q()), k - 1) * static_cast<long double>(p_);
  }

  /// P{X > payoff(k)} = q^k.
  long double tail_after(int k) const {
    if (is_classical()) return std::ldexp(1.0L, -k);
    return std::pow(static_cast<long double>(q()), k);
  }

  /// Largest level k with payoff(k) <= x, or 0 when x is below the support.
  int levels_at_most(long double x) const {
    if (!(x >= payoff(1))) return 0;
    if (std::isinf(x)) return std::numeric_limits<int>::max();
    if (is_classical()) {
      int e = 0;
      std::frexp(x, &e);
      return e - 1;
    }
    const long double v = static_cast<long double>(alpha_) * std::log(x) /
                          -std::log(static_cast<long double>(q()));
    int k = static_cast<int>(std::floor(v));
    k = std::max(k, 1);
    while (k > 1 && payoff(k) > x) --k;
    while (payoff(k + 1) <= x) ++k;
    return k;
  }

  friend bool operator==(const GameParams&, const GameParams&) = default;

 private:
  double alpha_ = 1.0;
  double p_ = 0.5;
};

/// One atom of the payoff law.
struct LevelValue {
  int k = 1;
  long double value = 2;
  long double prob = 0.5;
};

inline LevelValue level_value(int k, const GameParams& g = GameParams::classical()) {
  detail::require(k >= 1, "k", "level must be positive");
  return {k, g.payoff(k), g.prob(k)};
}

/// P{X > x}.
inline long double tail(long double x, const GameParams& g = GameParams::classical()) {
  if (std::isnan(x)) throw invalid_argument("x", "is NaN");
  const int k = g.levels_at_most(x);
  if (k == std::numeric_limits<int>::max()) return 0;
  return g.tail_after(k);
}

/// P{X <= x}. Right-continuous step function with jumps at the payoffs.
inline long double cdf(long double x, const GameParams& g = GameParams::classical()) {
  return 1.0L - tail(x, g);
}

/// Generalized inverse inf{x : s <= F(x)}.
inline long double quantile(double s, const GameParams& g = GameParams::classical()) {
  detail::require(s >= 0 && s < 1, "s", "must lie in [0, 1)");
  if (g.is_classical()) {
    int e = 0;
    std::frexp(1.0 - s, &e);
    return std::ldexp(1.0L, std::max(1, 1 - e));
  }
  // smallest k with 1 - q^k >= s
  const long double lq = std::log(static_cast<long double>(g.q()));
  int k = std::max(1, static_cast<int>(std::ceil(std::log1p(-static_cast<long double>(s)) / lq)));
  while (k > 1 && 1.0L - g.tail_after(k - 1) >= s) --k;
  while (1.0L - g.tail_after(k) < s) ++k;
  return g.payoff(k);
}

/// Psi(x) = 2^{frac(log2 x)} in [1, 2), extended to every x > 0 by
/// Psi(2x) = Psi(x). Exact: read off the binary exponent of x.
inline double psi(double x) {
  detail::require(x > 0 && std::isfinite(x), "x", "psi needs a positive finite argument");
  int e = 0;
  const double f = std::frexp(x, &e);
  return 2.0 * f;
}

/// floor(log2 x) for positive finite x, exact.
inline int floor_log2(double x) {
  int e = 0;
  std::frexp(x, &e);
  return e - 1;
}

/// frac(log2 x), with the value 0 at exact powers of two.
inline double frac_log2(double x) {
  return std::log2(psi(x));
}

/// ceil(log2 n) for n >= 1.
inline int ceil_log2(std::uint64_t n) {
  detail::require(n >= 1, "n", "must be at least 1");
  return n == 1 ? 0 : 64 - std::countl_zero(n - 1);
}

/// Positional parameter n / 2^ceil(log2 n) in (1/2, 1].
inline double gamma_n(std::uint64_t n) {
  return std::ldexp(static_cast<double>(n), -ceil_log2(n));
}

/// F_k(x) = P{X <= x | X <= 2^k}, classical game.
inline double truncated_cdf(double x, int k) {
  detail::require(k >= 1, "k", "level must be positive");
  if (x < 2) return 0.0;
  if (x >= std::ldexp(1.0, k)) return 1.0;
  const int m = floor_log2(x);
  return -std::expm1(-m * std::log(2.0)) / -std::expm1(-k * std::log(2.0));
}

/// E (X^(k))^ell for the classical law truncated at 2^k.
inline long double truncated_moment(int ell, int k) {
  detail::require(ell >= 1, "ell", "moment order must be positive");
  detail::require(k >= 1, "k", "level must be positive");
  const long double norm = 1.0L - std::ldexp(1.0L, -k);
  if (ell == 1) return static_cast<long double>(k) / norm;
  const long double a = std::ldexp(1.0L, ell - 1);
  const long double top = std::ldexp(1.0L, (ell - 1) * k) - 1.0L;
  return a / norm * top / (a - 1.0L);
}

// --- sampling ------------------------------------------------------------

/// Classical level: number of fair tosses up to and including the first
/// head, read off trailing zero bits. Exact for every level.
template <class Engine>
int draw_classical_level(Engine& eng) {
  int level = 0;
  for (;;) {
    const std::uint64_t u = eng();
    if (u != 0) return level + std::countr_zero(u) + 1;
    level += 64;
  }
}

/// Generalized level: count Bernoulli(q) failures before the first success.
template <class Engine>
int draw_level(Engine& eng, const GameParams& g) {
  if (g.is_classical()) return draw_classical_level(eng);
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(g.p(), 53));
  int k = 1;
  while ((eng() >> 11) >= threshold) ++k;
  return k;
}

/// Classical level conditioned on level <= k (law F_k), by exact inverse CDF:
/// v uniform on [1, 2^k - 1] falls in [2^m, 2^{m+1}) with probability
/// 2^m / (2^k - 1) = P{level = k - m | level <= k}.
template <class Engine>
int draw_truncated_level(Engine& eng, int k) {
  const std::uint64_t span = (std::uint64_t{1} << k) - 1;
  const std::uint64_t v = 1 + uniform_below(eng, span);
  return k - (63 - std::countl_zero(v));
}

template <class Engine>
double draw_payoff(Engine& eng, const GameParams& g = GameParams::classical()) {
  const int k = draw_level(eng, g);
  if (g.is_classical()) return std::ldexp(1.0, k);
  return static_cast<double>(g.payoff(k));
}

/// `count` i.i.d. payoffs, deterministic in `seed`.
inline std::vector<double> sample(const GameParams& g, std::size_t count, std::uint64_t seed) {
  detail::require(count >= 1, "count", "must be at least 1");
  auto eng = Xoshiro256::for_stream(seed, 0);
  std::vector<double> out(count);
  for (auto& v : out) v = draw_payoff(eng, g);
  return out;
}

}  // namespace stpete::dist
