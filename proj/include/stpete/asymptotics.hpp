#pragma once

// Closed-form tail asymptotics for sums and trimmed sums.
//
// The right-hand sides contain an inner probability P{S_k > y} for a short
// untrimmed sum. It is evaluated exactly when y fits the exact engine (or by
// enumeration for generalized games) and by seeded Monte Carlo otherwise; the
// backend used is recorded in the result.

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

#include "stpete/errors.hpp"
#include "stpete/exact.hpp"
#include "stpete/game.hpp"
#include "stpete/rng.hpp"

namespace stpete::asym {

enum class Backend { none, exact, enumeration, monte_carlo };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::exact: return "exact";
    case Backend::enumeration: return "enum";
    case Backend::monte_carlo: return "mc";
    default: return "none";
  }
}

struct InnerProb {
  long double value = 0;
  double ci_halfwidth = 0;  // 3 sigma; zero for deterministic backends
  Backend backend = Backend::none;
};

struct Options {
  exact::Limits limits{};
  std::uint64_t mc_reps = 1'000'000;
  std::uint64_t seed = 20140101;
};

struct TailAsymptote {
  long double leading = 0;
  long double correction = 1;
  long double value = 0;
  InnerProb inner;
};

inline long double binom(int n, int k) {
  long double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

namespace detail {

/// P{X_1 + ... + X_k > y} by plain simulation, one stream per replicate.
inline InnerProb mc_sum_tail(int k, long double y, const dist::GameParams& g,
                             const Options& opt) {
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < opt.mc_reps; ++i) {
    auto eng = Xoshiro256::for_stream(opt.seed, i);
    long double s = 0;
    for (int j = 0; j < k; ++j) s += dist::draw_payoff(eng, g);
    if (s > y) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(opt.mc_reps);
  return {p, 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(opt.mc_reps)),
          Backend::monte_carlo};
}

/// P{S_k > y} for the classical game.
inline InnerProb classical_sum_tail(int k, long double y, const Options& opt) {
  if (k == 0 || y < 0) return {y < 0 ? 1.0L : 0.0L, 0, Backend::exact};
  if (y <= static_cast<long double>(opt.limits.cap) && k <= exact::kMaxN) {
    const auto yi = static_cast<std::uint64_t>(std::floor(y));
    return {exact::sum_tail_exact(k, yi, opt.limits).to_long_double(), 0, Backend::exact};
  }
  return mc_sum_tail(k, y, dist::GameParams::classical(), opt);
}

/// {log_{1/q} x^alpha}, snapped to 0 within 1e-12 of an integer.
inline long double frac_log_q(long double x, const dist::GameParams& g) {
  const long double y = static_cast<long double>(g.alpha()) * std::log(x) /
                        -std::log(static_cast<long double>(g.q()));
  long double f = y - std::floor(y);
  if (f < 1e-12L || f > 1 - 1e-12L) f = 0;
  return f;
}

}  // namespace detail

/// Asymptotic right-hand side for P{S_{n,r} > x}, classical game.
inline TailAsymptote snr_tail_rhs(int n, int r, double x, const Options& opt = {}) {
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  stpete::detail::require(x >= 2 && std::isfinite(x), "x", "must be at least 2");
  const long double ps = dist::psi(x);
  const int e = r + 1;
  TailAsymptote out;
  out.leading = binom(n, e) * std::pow(ps / static_cast<long double>(x), e);
  const long double y = x * (1.0L - 1.0L / ps);
  out.inner = detail::classical_sum_tail(n - r - 1, y, opt);
  out.correction = 1 + out.inner.value * (std::ldexp(1.0L, e) - 1);
  out.value = out.leading * out.correction;
  return out;
}

/// P{S_{n,r} > 2^m + c} approximation for fixed c > 1.
inline TailAsymptote finer_as_rhs(int n, int r, int m, double c, const Options& opt = {}) {
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  stpete::detail::require(m >= 1, "m", "must be at least 1");
  stpete::detail::require(c > 1 && std::isfinite(c), "c", "must exceed 1");
  const int e = r + 1;
  TailAsymptote out;
  out.leading = binom(n, e) * std::ldexp(1.0L, -m * e);
  out.inner = detail::classical_sum_tail(n - r - 1, c, opt);
  out.correction = 1 + out.inner.value * (std::ldexp(1.0L, e) - 1);
  out.value = out.leading * out.correction;
  return out;
}

/// (liminf, limsup) of P{X_1 + X_2 > x} / P{X > x}.
inline std::pair<double, double> subexp_limits(const dist::GameParams& g) {
  return {2.0, static_cast<double>(2.0L / (1.0L - static_cast<long double>(g.p())))};
}

/// Generalized-game tail right-hand side. The inner probability comes from
/// enumeration when the short sum has at most 5 terms, else Monte Carlo.
inline TailAsymptote gen_snr_tail_rhs(int n, int r, double x, const dist::GameParams& g,
                                      const Options& opt = {}) {
  if (g.is_classical()) return snr_tail_rhs(n, r, x, opt);
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  stpete::detail::require(x > 1 && std::isfinite(x), "x", "must exceed 1");
  const long double q = g.q();
  const long double a = g.alpha();
  const long double f = detail::frac_log_q(x, g);
  const int e = r + 1;
  TailAsymptote out;
  out.leading = binom(n, e) * std::pow(q, -e * f) / std::pow(static_cast<long double>(x), e * a);
  const long double y = x * (1 - std::pow(q, f / a));
  const int k = n - r - 1;
  if (k == 0) {
    out.inner = {0, 0, Backend::exact};
  } else if (k <= exact::kMaxEnumN &&
             std::pow(static_cast<double>(g.levels_at_most(y) + 1), k) <= 5e7) {
    out.inner = {exact::enum_oracle(k, 0, y, g), 0, Backend::enumeration};
  } else {
    out.inner = detail::mc_sum_tail(k, y, g, opt);
  }
  out.correction = 1 + out.inner.value * (std::pow(q, -e) - 1);
  out.value = out.leading * out.correction;
  return out;
}

/// Uniform tail bound for the centred, normalized trimmed sum.
inline double uniform_bound_rhs(int r, double x, double delta, double C) {
  stpete::detail::require(r >= 0, "r", "must be non-negative");
  stpete::detail::require(x >= M_E, "x", "must be at least e");
  stpete::detail::require(delta > 0 && delta < 1, "delta", "must lie in (0, 1)");
  stpete::detail::require(C >= 0, "C", "must be non-negative");
  const double e = r + 1;
  return std::pow(2.0, e) / std::tgamma(e + 1) * std::pow((1 - delta) * x, -e) +
         C * std::pow(delta * x, -(e + 0.5));
}

/// Smallest C >= 0 for which the bound dominates the given tail estimates.
inline double calibrate_uniform_C(int r, double delta, std::span<const double> xs,
                                  std::span<const double> tails) {
  stpete::detail::require(xs.size() == tails.size(), "tails", "size must match xs");
  double C = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double gap = tails[i] - uniform_bound_rhs(r, xs[i], delta, 0.0);
    if (gap > 0) C = std::max(C, gap * std::pow(delta * xs[i], r + 1.5));
  }
  return C;
}

}  // namespace stpete::asym
