#pragma once

// Exact tail probabilities P{S_n > x} and P{S_{n,r} > x} for the classical
// game.
//
// Only the atoms 2, 4, ..., 2^L with 2^L <= cap can leave a sum at or below
// the cap. Every larger payoff is folded into one "big" atom of mass 2^-L: a
// single big summand that is not trimmed pushes the sum over the cap. This
// makes the infinite support finite without approximation.
//
// All masses are integers over the common denominator 2^{nL}: an item at
// level k carries weight 2^{L-k} and a big item weight 1. Sums of payoffs are
// even, so tables are indexed by half-sums.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "stpete/dyadic.hpp"
#include "stpete/errors.hpp"
#include "stpete/game.hpp"

namespace stpete::exact {

inline constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 20;
inline constexpr int kMaxN = 32;
inline constexpr int kMaxEnumN = 5;

/// Resource guard for the exact engines.
struct Limits {
  std::uint64_t cap = kDefaultCap;
  std::size_t max_bytes = std::size_t{1} << 30;
};

namespace detail {

using u128 = unsigned __int128;
using boost::multiprecision::uint1024_t;
using boost::multiprecision::uint256_t;
using boost::multiprecision::uint512_t;

using WordVectors = std::variant<std::vector<std::uint64_t>, std::vector<u128>,
                                 std::vector<uint256_t>, std::vector<uint512_t>,
                                 std::vector<uint1024_t>, std::vector<BigInt>>;

template <class U>
BigInt to_big(const U& v) {
  if constexpr (std::is_same_v<U, u128>) {
    BigInt hi(static_cast<std::uint64_t>(v >> 64));
    return (hi << 64) | BigInt(static_cast<std::uint64_t>(v));
  } else {
    return BigInt(v);
  }
}

template <class U>
std::size_t word_bytes(unsigned bits) {
  if constexpr (std::is_same_v<U, BigInt>)
    return sizeof(BigInt) + bits / 8 + 8;
  else
    return sizeof(U);
}

/// Calls f(U{}) with the narrowest unsigned word holding `bits` bits.
template <class F>
decltype(auto) with_word(unsigned bits, F&& f) {
  if (bits <= 64) return f(std::uint64_t{});
  if (bits <= 128) return f(u128{});
  if (bits <= 256) return f(uint256_t{});
  if (bits <= 512) return f(uint512_t{});
  if (bits <= 1024) return f(uint1024_t{});
  return f(BigInt{});
}

inline int explicit_levels(std::uint64_t cap) {
  return cap < 2 ? 0 : stpete::dist::floor_log2(static_cast<double>(cap));
}

inline void check_n(int n) {
  stpete::detail::require(n >= 1 && n <= kMaxN, "n",
                          "supported range is 1.." + std::to_string(kMaxN));
}

inline void check_cap(std::uint64_t x, const Limits& lim) {
  stpete::detail::require(x <= lim.cap, "x",
                          "exceeds the exact-engine cap " + std::to_string(lim.cap));
}

inline void check_bytes(std::size_t bytes, const Limits& lim) {
  if (bytes > lim.max_bytes)
    throw capacity_error("exact engine would need " + std::to_string(bytes >> 20) +
                         " MiB, above the memory guard of " +
                         std::to_string(lim.max_bytes >> 20) + " MiB");
}

inline std::uint64_t binomial(int m, int c) {
  std::uint64_t b = 1;
  for (int i = 1; i <= c; ++i) b = b * static_cast<std::uint64_t>(m - c + i) / i;
  return b;
}

}  // namespace detail

/// Exact law of a (trimmed) sum restricted to values <= cap, plus the mass of
/// the event "sum > cap".
class CappedTailTable {
 public:
  template <class U>
  CappedTailTable(std::uint64_t cap, int kept, std::uint32_t log2_den, std::vector<U> half_masses,
                  U overflow)
      : cap_(cap), kept_(kept), log2_den_(log2_den) {
    // tails[h] = mass of half-sums > h, plus overflow.
    std::vector<U> tails(half_masses.size());
    U acc = overflow;
    for (std::size_t h = half_masses.size(); h-- > 0;) {
      tails[h] = acc;
      acc += half_masses[h];
    }
    total_ = detail::to_big(acc);
    overflow_ = detail::to_big(overflow);
    masses_ = std::move(half_masses);
    tails_ = std::move(tails);
  }

  std::uint64_t cap() const noexcept { return cap_; }
  /// Number of summands that survive trimming.
  int kept() const noexcept { return kept_; }
  std::uint32_t log2_denominator() const noexcept { return log2_den_; }

  /// P{sum = s}; zero for odd s.
  DyadicProb mass(std::uint64_t s) const {
    stpete::detail::require(s <= cap_, "s", "beyond the table cap");
    if (s % 2 != 0) return DyadicProb::zero();
    return std::visit(
        [&](const auto& v) { return DyadicProb(detail::to_big(v[s / 2]), log2_den_); }, masses_);
  }

  DyadicProb overflow() const { return {overflow_, log2_den_}; }

  /// Sum of all masses plus overflow; equals one exactly.
  DyadicProb total() const { return {total_, log2_den_}; }

  /// P{sum > x} for x <= cap.
  DyadicProb tail(std::int64_t x) const {
    if (x < 0) return total();
    stpete::detail::require(static_cast<std::uint64_t>(x) <= cap_, "x", "beyond the table cap");
    const auto h = static_cast<std::size_t>(x) / 2;
    return std::visit([&](const auto& v) { return DyadicProb(detail::to_big(v[h]), log2_den_); },
                      tails_);
  }

  /// P{sum > x} in extended precision, for sweeping large grids.
  long double tail_ld(std::int64_t x) const {
    if (x < 0) return 1.0L;
    stpete::detail::require(static_cast<std::uint64_t>(x) <= cap_, "x", "beyond the table cap");
    const auto h = static_cast<std::size_t>(x) / 2;
    return std::visit(
        [&](const auto& v) -> long double {
          using U = typename std::decay_t<decltype(v)>::value_type;
          if constexpr (std::is_same_v<U, std::uint64_t> || std::is_same_v<U, detail::u128>)
            return std::ldexp(static_cast<long double>(v[h]), -static_cast<int>(log2_den_));
          else
            return DyadicProb(detail::to_big(v[h]), log2_den_).to_long_double();
        },
        tails_);
  }

 private:
  std::uint64_t cap_ = 0;
  int kept_ = 0;
  std::uint32_t log2_den_ = 0;
  detail::WordVectors masses_;
  detail::WordVectors tails_;
  BigInt overflow_;
  BigInt total_;
};

/// Law of S_n capped at `cap`, by n-fold convolution of the single-summand law.
inline CappedTailTable sum_table(int n, std::uint64_t cap, const Limits& lim = {}) {
  detail::check_n(n);
  detail::check_cap(cap, lim);
  const int L = detail::explicit_levels(cap);
  const auto bits = static_cast<unsigned>(n * L + 8);
  const std::size_t halves = cap / 2 + 1;
  return detail::with_word(bits, [&]<class U>(U) {
    detail::check_bytes(2 * halves * detail::word_bytes<U>(bits), lim);
    std::vector<U> cur(halves, U(0)), next(halves, U(0));
    U over(0);
    cur[0] = U(1);
    for (int step = 0; step < n; ++step) {
      std::fill(next.begin(), next.end(), U(0));
      U next_over = over << L;  // any draw keeps an exceeded sum exceeded
      for (std::size_t h = 0; h < halves; ++h) {
        if (cur[h] == 0) continue;
        next_over += cur[h];  // big atom, weight 1
        for (int k = 1; k <= L; ++k) {
          const std::size_t to = h + (std::size_t{1} << (k - 1));
          const U w = cur[h] << (L - k);
          if (to < halves)
            next[to] += w;
          else
            next_over += w;
        }
      }
      std::swap(cur, next);
      over = next_over;
    }
    return CappedTailTable(cap, n, static_cast<std::uint32_t>(n * L), std::move(cur), over);
  });
}

/// One cell of the trimmed level DP: the state after all levels above
/// `level` have been placed. Items are scanned from the largest level down;
/// the first `trimmed` of them are discarded and the rest accumulate into the
/// capped kept sum (`cap + 1` is the absorbing "exceeded" value).
struct TrimmedDPState {
  int level = 0;
  int items_remaining = 0;
  int trimmed = 0;
  std::uint64_t kept_sum_capped = 0;
  DyadicProb prob;
};

/// Law of S_{n,r} capped at `cap`.
///
/// The count of items at each level is drawn in descending order of level;
/// with c of the m unplaced items at level k the path weight gains
/// binom(m, c) (2^{L-k})^c, which is the multinomial factorization of the
/// order statistics of a geometric sample.
inline CappedTailTable trimmed_table(int n, int r, std::uint64_t cap, const Limits& lim = {}) {
  detail::check_n(n);
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  detail::check_cap(cap, lim);
  const int L = detail::explicit_levels(cap);
  const auto bits = static_cast<unsigned>(n * L + 8);
  const std::size_t halves = cap / 2 + 1;
  const std::size_t exceeded = halves;  // absorbing half-index
  const std::size_t width = halves + 1;
  const std::size_t cells = static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(r + 1);

  return detail::with_word(bits, [&]<class U>(U) {
    detail::check_bytes(2 * cells * width * detail::word_bytes<U>(bits), lim);
    // layer[m * (r+1) + t] is the kept-sum array with m items unplaced and
    // t items trimmed; empty vector = unreachable.
    std::vector<std::vector<U>> layer(cells), next(cells);
    auto cell = [&](int m, int t) { return static_cast<std::size_t>(m) * (r + 1) + t; };
    layer[cell(n, 0)].assign(width, U(0));
    layer[cell(n, 0)][0] = U(1);

    // Level L + 1 stands for the big atom.
    for (int level = L + 1; level >= 1; --level) {
      const bool big = level == L + 1;
      const int shift = big ? 0 : L - level;
      const std::size_t step = big ? 0 : std::size_t{1} << (level - 1);
      for (auto& v : next) v.clear();
      for (int m = 0; m <= n; ++m) {
        for (int t = 0; t <= r; ++t) {
          const auto& src = layer[cell(m, t)];
          if (src.empty()) continue;
          // At the lowest level every remaining item must land here.
          const int c_lo = level == 1 ? m : 0;
          for (int c = c_lo; c <= m; ++c) {
            const int trim = std::min(c, r - t);
            const int keep = c - trim;
            auto& dst = next[cell(m - c, t + trim)];
            if (dst.empty()) dst.assign(width, U(0));
            const U coef = U(detail::binomial(m, c)) << (shift * c);
            if (big && keep > 0) {
              U sum(0);
              for (std::size_t h = 0; h < width; ++h) sum += src[h];
              dst[exceeded] += sum * coef;
              continue;
            }
            const std::size_t add = static_cast<std::size_t>(keep) * step;
            for (std::size_t h = 0; h < halves; ++h) {
              if (src[h] == 0) continue;
              const std::size_t to = std::min(h + add, exceeded);
              dst[to] += src[h] * coef;
            }
            if (src[exceeded] != 0) dst[exceeded] += src[exceeded] * coef;
          }
        }
      }
      std::swap(layer, next);
    }

    std::vector<U> masses(halves, U(0));
    U over(0);
    for (int t = 0; t <= r; ++t) {
      const auto& v = layer[cell(0, t)];
      if (v.empty()) continue;
      for (std::size_t h = 0; h < halves; ++h) masses[h] += v[h];
      over += v[exceeded];
    }
    return CappedTailTable(cap, n - r, static_cast<std::uint32_t>(n * L), std::move(masses), over);
  });
}

/// Exact P{S_n > x}.
inline DyadicProb sum_tail_exact(int n, std::uint64_t x, const Limits& lim = {}) {
  return sum_table(n, x, lim).tail(static_cast<std::int64_t>(x));
}

/// Exact P{S_{n,r} > x}.
inline DyadicProb trimmed_tail_exact(int n, int r, std::uint64_t x, const Limits& lim = {}) {
  return trimmed_table(n, r, x, lim).tail(static_cast<std::int64_t>(x));
}

/// Closed form of P{X_1 + X_2 > 2^k + 2^l}, 1 <= k <= l.
inline DyadicProb two_sum_tail_closed(int k, int l) {
  stpete::detail::require(k >= 1, "k", "must be at least 1");
  stpete::detail::require(l >= k, "l", "must satisfy l >= k");
  const auto L = static_cast<std::uint32_t>(l);
  if (l == k) {
    // 2 * 2^-l - 2^-2l
    return DyadicProb((BigInt(2) << L) - 1, 2 * L);
  }
  // 2 * 2^-l + 2 * 2^-(l+k) - 4 * 2^-2l over 2^{2l}
  const auto K = static_cast<std::uint32_t>(k);
  BigInt num = (BigInt(2) << L) + (BigInt(2) << (L - K)) - 4;
  return DyadicProb(std::move(num), 2 * L);
}

namespace detail {

/// Odometer over {0..base-1}^n.
inline bool next_vector(std::vector<int>& v, int base) {
  for (auto& d : v) {
    if (++d < base) return true;
    d = 0;
  }
  return false;
}

}  // namespace detail

/// Exhaustive enumeration of P{S_{n,r} > x}, classical game, exact.
///
/// Every level vector in {1..L, big}^n is visited; the r largest entries are
/// dropped and the rest summed. Independent of the DP engines.
inline DyadicProb enum_oracle(int n, int r, std::uint64_t x) {
  stpete::detail::require(n >= 1 && n <= kMaxEnumN, "n",
                          "enumeration supports 1.." + std::to_string(kMaxEnumN));
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  const int L = detail::explicit_levels(x);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);  // idx == L means big
  std::vector<std::uint64_t> vals(static_cast<std::size_t>(n));
  BigInt total = 0;
  do {
    unsigned weight_shift = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] == L) {
        vals[i] = x + 1;  // any value above x, and above every explicit atom
      } else {
        const int level = idx[i] + 1;
        vals[i] = std::uint64_t{1} << level;
        weight_shift += static_cast<unsigned>(L - level);
      }
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    std::uint64_t s = 0;
    bool over = false;
    for (std::size_t i = static_cast<std::size_t>(r); i < vals.size(); ++i) {
      if (vals[i] > x) over = true;
      s += vals[i];
    }
    if (over || s > x) total += BigInt(1) << weight_shift;
  } while (detail::next_vector(idx, L + 1));
  return DyadicProb(std::move(total), static_cast<std::uint32_t>(n * L));
}

/// Exhaustive enumeration for a generalized game, in extended precision.
/// Levels with payoff <= x are explicit; the rest form one big atom of mass q^L.
inline long double enum_oracle(int n, int r, long double x, const dist::GameParams& g) {
  stpete::detail::require(n >= 1 && n <= kMaxEnumN, "n",
                          "enumeration supports 1.." + std::to_string(kMaxEnumN));
  stpete::detail::require(r >= 0 && r < n, "r", "must satisfy 0 <= r < n");
  stpete::detail::require(x >= 0 && std::isfinite(x), "x", "must be finite and non-negative");
  const int L = g.levels_at_most(x);
  stpete::detail::require(std::pow(static_cast<double>(L + 1), n) <= 5e7, "x",
                          "enumeration grid too large");
  std::vector<long double> payoff(static_cast<std::size_t>(L) + 1), mass(payoff.size());
  for (int k = 1; k <= L; ++k) {
    payoff[k - 1] = g.payoff(k);
    mass[k - 1] = g.prob(k);
  }
  payoff[L] = std::numeric_limits<long double>::infinity();
  mass[L] = g.tail_after(L);

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<long double> vals(static_cast<std::size_t>(n));
  long double sum = 0, comp = 0;  // Neumaier
  do {
    long double pr = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      vals[i] = payoff[idx[i]];
      pr *= mass[idx[i]];
    }
    std::sort(vals.begin(), vals.end());
    long double s = 0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(r) < vals.size(); ++i) s += vals[i];
    if (s > x) {
      const long double t = sum + pr;
      comp += std::fabs(sum) >= std::fabs(pr) ? (sum - t) + pr : (pr - t) + sum;
      sum = t;
    }
  } while (detail::next_vector(idx, L + 1));
  return sum + comp;
}

struct ConvRatioPoint {
  std::uint64_t x = 0;
  DyadicProb two_sum_tail;  // P{X_1 + X_2 > x}
  DyadicProb single_tail;   // P{X > x}
  long double ratio = 0;
};

/// P{X_1 + X_2 > x} / P{X > x} along a grid; one table serves the whole grid.
inline std::vector<ConvRatioPoint> conv_ratio_curve(std::span<const std::uint64_t> xs,
                                                    const Limits& lim = {}) {
  std::vector<ConvRatioPoint> out;
  if (xs.empty()) return out;
  const std::uint64_t top = *std::max_element(xs.begin(), xs.end());
  const auto table = sum_table(2, top, lim);
  out.reserve(xs.size());
  for (auto x : xs) {
    ConvRatioPoint pt;
    pt.x = x;
    pt.two_sum_tail = table.tail(static_cast<std::int64_t>(x));
    const int L = detail::explicit_levels(x);
    pt.single_tail = DyadicProb::pow2(static_cast<std::uint32_t>(L));
    pt.ratio = pt.two_sum_tail.to_long_double() / pt.single_tail.to_long_double();
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace stpete::exact
