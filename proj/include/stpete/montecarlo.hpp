#pragma once

// Seeded simulation harness. Replicate i always draws from
// Xoshiro256::for_stream(seed, i) and writes only its own slot, so every
// result is bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stpete/asymptotics.hpp"
#include "stpete/cf_inversion.hpp"
#include "stpete/errors.hpp"
#include "stpete/exact.hpp"
#include "stpete/game.hpp"
#include "stpete/limitlaw.hpp"
#include "stpete/parallel.hpp"
#include "stpete/rng.hpp"

namespace stpete::mc {

/// Sorted sample with tail and confidence evaluators.
class EmpiricalTail {
 public:
  EmpiricalTail() = default;
  explicit EmpiricalTail(std::vector<double> samples) : s_(std::move(samples)) {
    std::sort(s_.begin(), s_.end());
  }

  std::size_t reps() const noexcept { return s_.size(); }
  const std::vector<double>& sorted() const noexcept { return s_; }

  /// Fraction of samples > x.
  double tail(double x) const {
    if (s_.empty()) return 0;
    const auto it = std::upper_bound(s_.begin(), s_.end(), x);
    return static_cast<double>(s_.end() - it) / static_cast<double>(s_.size());
  }
  double cdf(double x) const { return 1 - tail(x); }

  /// 3 sqrt(p(1-p)/reps) at p = tail(x).
  double ci_halfwidth(double x) const {
    const double p = tail(x);
    return 3 * std::sqrt(p * (1 - p) / static_cast<double>(s_.size()));
  }

  double quantile(double u) const {
    stpete::detail::require(!s_.empty(), "sample", "is empty");
    const auto i = std::min(s_.size() - 1, static_cast<std::size_t>(u * static_cast<double>(s_.size())));
    return s_[i];
  }
  double median() const { return quantile(0.5); }

  double mean() const {
    long double m = 0;
    for (double v : s_) m += v;
    return static_cast<double>(m / static_cast<long double>(s_.size()));
  }

 private:
  std::vector<double> s_;
};

/// Kolmogorov distance between a sample and a continuous distribution
/// function. Tied sample values are compared on both sides of the jump.
inline double ks_distance(const EmpiricalTail& sample, const std::function<double(double)>& F) {
  const auto& s = sample.sorted();
  const auto N = static_cast<double>(s.size());
  double d = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t k = i;
    while (k < s.size() && s[k] == s[i]) ++k;
    const double f = F(s[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / N), std::abs(static_cast<double>(k) / N - f)});
    i = k;
  }
  return std::min(d, 1.0);
}

enum class Normalization {
  raw,         // S_{n,r}
  centered,    // S_{n,r}/n - a_{n,gamma_n}^{(r)}
  log_shifted  // S_{n,r}/n - log2 n
};

struct SimPlan {
  std::uint64_t n = 1;
  int r = 0;
  std::uint64_t reps = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: default_threads()
};

namespace detail {

inline void check_plan(const SimPlan& p) {
  stpete::detail::require(p.n >= 1, "n", "must be at least 1");
  stpete::detail::require(p.r >= 0 && static_cast<std::uint64_t>(p.r) < p.n, "r",
                          "must satisfy 0 <= r < n");
  stpete::detail::require(p.reps >= 1, "reps", "must be at least 1");
}

/// Sum of n draws minus the r largest, keeping the top r in a small sorted
/// buffer.
template <class Engine>
long double trimmed_draw(Engine& eng, std::uint64_t n, int r, const dist::GameParams& g,
                         std::vector<long double>& top) {
  long double s = 0;
  top.assign(static_cast<std::size_t>(r), 0.0L);
  for (std::uint64_t i = 0; i < n; ++i) {
    long double v = g.is_classical() ? std::ldexp(1.0L, dist::draw_classical_level(eng))
                                     : static_cast<long double>(dist::draw_payoff(eng, g));
    s += v;
    if (r > 0 && v > top.front()) {
      // top is ascending; insert v and drop the smallest
      std::size_t j = 0;
      while (j + 1 < top.size() && top[j + 1] < v) {
        top[j] = top[j + 1];
        ++j;
      }
      top[j] = v;
    }
  }
  for (auto v : top) s -= v;
  return s;
}

}  // namespace detail

/// Empirical law of S_{n,r} under the chosen normalization.
inline EmpiricalTail simulate_trimmed(const SimPlan& plan,
                                      const dist::GameParams& g = dist::GameParams::classical(),
                                      Normalization norm = Normalization::raw) {
  detail::check_plan(plan);
  double shift = 0;
  if (norm == Normalization::centered)
    shift = limit::centering(plan.n, dist::gamma_n(plan.n), plan.r);
  else if (norm == Normalization::log_shifted)
    shift = std::log2(static_cast<double>(plan.n));
  std::vector<double> out(plan.reps);
  parallel_for(plan.reps, plan.threads, [&](std::size_t i) {
    thread_local std::vector<long double> top;
    auto eng = Xoshiro256::for_stream(plan.seed, i);
    const long double s = detail::trimmed_draw(eng, plan.n, plan.r, g, top);
    out[i] = norm == Normalization::raw
                 ? static_cast<double>(s)
                 : static_cast<double>(s / static_cast<long double>(plan.n) - shift);
  });
  return EmpiricalTail(std::move(out));
}

struct KsReport {
  std::uint64_t n = 0;
  std::uint64_t reps = 0;
  double gamma = 1;
  double ks = 0;
  double inversion_error = 0;  // largest error estimate on the reference grid
  double grid_tail = 0;        // reference mass beyond the grid, a bound on clamping error
};

/// KS distance of S_n/n - log2 n from G_{gamma_n}.
inline KsReport merge_check(std::uint64_t n, std::uint64_t reps, std::uint64_t seed,
                            unsigned threads = 0) {
  stpete::detail::require(n >= 2, "n", "must be at least 2");
  const double gamma = dist::gamma_n(n);
  const auto curve = limit::gamma_curve(gamma, {}, threads);
  const auto sample = simulate_trimmed({n, 0, reps, seed, threads}, dist::GameParams::classical(),
                                       Normalization::log_shifted);
  return {n, reps, gamma, ks_distance(sample, [&](double x) { return curve(x); }),
          curve.max_error(), 1 - curve.cdf.back()};
}

/// KS distance of (S_n - X_n*)/n - log2 n from G*_{gamma_n}.
inline KsReport trimmed_merge_check(std::uint64_t n, std::uint64_t reps, std::uint64_t seed,
                                    unsigned threads = 0) {
  stpete::detail::require(n >= 2, "n", "must be at least 2");
  const double gamma = dist::gamma_n(n);
  const limit::SemistableTables tables(gamma);
  const auto sample = simulate_trimmed({n, 1, reps, seed, threads}, dist::GameParams::classical(),
                                       Normalization::log_shifted);
  const auto& c = tables.gstar_curve();
  return {n, reps, gamma, ks_distance(sample, [&](double x) { return c(x); }), c.max_error(),
          1 - c.cdf.back()};
}

struct MaxPmfRow {
  int j = 0;
  double empirical = 0;
  double p_weight = 0;
  double deviation = 0;
  double sigma = 0;  // binomial standard error of the empirical value
};

/// Empirical P{X_n* = 2^{ceil(log2 n) + j}} against p_{j,gamma_n}, j in [j_min, j_max].
inline std::vector<MaxPmfRow> max_pmf_check(std::uint64_t n, std::uint64_t reps, std::uint64_t seed,
                                            int j_min = -3, int j_max = 6, unsigned threads = 0) {
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(reps >= 1, "reps", "must be at least 1");
  stpete::detail::require(j_min <= j_max, "j_max", "must be at least j_min");
  std::vector<int> level(reps);
  parallel_for(reps, threads, [&](std::size_t i) {
    auto eng = Xoshiro256::for_stream(seed, i);
    int m = 0;
    for (std::uint64_t k = 0; k < n; ++k) m = std::max(m, dist::draw_classical_level(eng));
    level[i] = m;
  });
  const int c = dist::ceil_log2(n);
  const double gamma = dist::gamma_n(n);
  std::vector<MaxPmfRow> rows;
  for (int j = j_min; j <= j_max; ++j) {
    const auto hits = std::count(level.begin(), level.end(), c + j);
    MaxPmfRow row;
    row.j = j;
    row.empirical = static_cast<double>(hits) / static_cast<double>(reps);
    row.p_weight = limit::p_weight(j, gamma);
    row.deviation = row.empirical - row.p_weight;
    row.sigma = std::sqrt(row.p_weight * (1 - row.p_weight) / static_cast<double>(reps));
    rows.push_back(row);
  }
  return rows;
}

struct ChernoffRow {
  double x = 0;
  double empirical = 0;
  double bound = 0;
  double ci = 0;
  bool violated = false;
};

/// Empirical P{S_n^{(k)} - E S_n^{(k)} > n x}, k = ceil(log2 n) + j, against
/// e^{-h(x)/eta}. Summands follow the truncated law F_k.
inline std::vector<ChernoffRow> chernoff_check(std::uint64_t n, int j, std::span<const double> xs,
                                               std::uint64_t reps, std::uint64_t seed,
                                               unsigned threads = 0) {
  stpete::detail::require(reps >= 1, "reps", "must be at least 1");
  const int k = dist::ceil_log2(n) + j;
  stpete::detail::require(k >= 1 && k <= 62, "j", "truncation level out of range");
  const double bound0 = limit::chernoff_bound(n, j, 0.0);  // validates (n, j)
  (void)bound0;
  const long double mean = static_cast<long double>(n) * dist::truncated_moment(1, k);
  std::vector<double> dev(reps);
  parallel_for(reps, threads, [&](std::size_t i) {
    auto eng = Xoshiro256::for_stream(seed, i);
    std::uint64_t s = 0;
    for (std::uint64_t t = 0; t < n; ++t) s += std::uint64_t{1} << dist::draw_truncated_level(eng, k);
    dev[i] = static_cast<double>((static_cast<long double>(s) - mean) / static_cast<long double>(n));
  });
  const EmpiricalTail et(std::move(dev));
  std::vector<ChernoffRow> rows;
  for (double x : xs) {
    ChernoffRow row;
    row.x = x;
    row.empirical = et.tail(x);
    row.bound = limit::chernoff_bound(n, j, x);
    row.ci = 3 * std::sqrt(row.bound * (1 - row.bound) / static_cast<double>(reps));
    row.violated = row.empirical > row.bound + row.ci;
    rows.push_back(row);
  }
  return rows;
}

struct Histogram {
  double bin_width = 0.25;
  double left = 0;
  std::vector<std::uint64_t> counts;

  double bin_left(std::size_t i) const { return left + bin_width * static_cast<double>(i); }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
  std::uint64_t mass_above(double v) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (bin_left(i) >= v) t += counts[i];
    return t;
  }
  /// Local maxima with at least `min_count` entries, at or above `from`.
  int peaks_above(double from, std::uint64_t min_count) const {
    int p = 0;
    for (std::size_t i = 1; i + 1 < counts.size(); ++i)
      if (bin_left(i) >= from && counts[i] >= min_count && counts[i] > counts[i - 1] &&
          counts[i] >= counts[i + 1])
        ++p;
    return p;
  }
};

struct Fig1Data {
  std::uint64_t n = 0;
  std::uint64_t reps = 0;
  Histogram sum;      // log2 S_n
  Histogram trimmed;  // log2 (S_n - X_n*)
  double side_lobe_threshold = 0;
  double side_lobe_ratio = 0;  // trimmed mass above threshold / untrimmed mass above it
};

inline Fig1Data histogram_fig1(std::uint64_t n, std::uint64_t reps, std::uint64_t seed,
                               double bin_width = 0.25, unsigned threads = 0) {
  stpete::detail::require(n >= 2, "n", "must be at least 2");
  stpete::detail::require(reps >= 1, "reps", "must be at least 1");
  stpete::detail::require(bin_width > 0, "bin_width", "must be positive");
  std::vector<double> a(reps), b(reps);
  parallel_for(reps, threads, [&](std::size_t i) {
    auto eng = Xoshiro256::for_stream(seed, i);
    long double s = 0;
    int top = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
      const int lv = dist::draw_classical_level(eng);
      top = std::max(top, lv);
      s += std::ldexp(1.0L, lv);
    }
    a[i] = static_cast<double>(std::log2(s));
    b[i] = static_cast<double>(std::log2(s - std::ldexp(1.0L, top)));
  });
  Fig1Data d;
  d.n = n;
  d.reps = reps;
  const double hi = std::max(*std::max_element(a.begin(), a.end()), 1.0);
  const auto bins = static_cast<std::size_t>(std::ceil(hi / bin_width)) + 1;
  for (auto* h : {&d.sum, &d.trimmed}) {
    h->bin_width = bin_width;
    h->left = 0;
    h->counts.assign(bins, 0);
  }
  for (std::size_t i = 0; i < reps; ++i) {
    d.sum.counts[static_cast<std::size_t>(a[i] / bin_width)]++;
    d.trimmed.counts[static_cast<std::size_t>(std::max(b[i], 0.0) / bin_width)]++;
  }
  const double l = std::log2(static_cast<double>(n));
  d.side_lobe_threshold = l + std::log2(l) + 2;
  const auto ua = d.sum.mass_above(d.side_lobe_threshold);
  d.side_lobe_ratio = ua == 0 ? 0 : static_cast<double>(d.trimmed.mass_above(d.side_lobe_threshold)) /
                                        static_cast<double>(ua);
  return d;
}

struct OscPoint {
  std::uint64_t x = 0;
  long double value = 0;  // x P{S_n > x}
};

/// x P{S_n > x} from the exact engine on the given grid.
inline std::vector<OscPoint> oscillation_curve_fig2(int n, std::span<const std::uint64_t> xs,
                                                    const exact::Limits& lim = {}) {
  std::vector<OscPoint> out;
  if (xs.empty()) return out;
  const auto table = exact::sum_table(n, *std::max_element(xs.begin(), xs.end()), lim);
  for (auto x : xs)
    out.push_back({x, static_cast<long double>(x) * table.tail_ld(static_cast<std::int64_t>(x))});
  return out;
}

/// Every even x in [2^m0, xmax] plus the odd points 2^m + 1 and 2^m - 1.
inline std::vector<std::uint64_t> fig2_grid(std::uint64_t xmax, int points_per_octave = 64) {
  stpete::detail::require(xmax >= 4, "xmax", "must be at least 4");
  std::vector<std::uint64_t> xs;
  for (int m = 1; (std::uint64_t{1} << m) <= xmax; ++m) {
    const std::uint64_t a = std::uint64_t{1} << m;
    const std::uint64_t step = std::max<std::uint64_t>(1, a / static_cast<std::uint64_t>(points_per_octave));
    if (a > 2) xs.push_back(a - 1);
    for (std::uint64_t x = a; x < 2 * a && x <= xmax; x += step) xs.push_back(x);
    if (a + 1 <= xmax) xs.push_back(a + 1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

struct JumpReport {
  int m = 0;
  long double left = 0;       // left limit at 2^m: 2^m P{S_n > 2^m - 1}
  long double at = 0;         // value at 2^m
  long double octave_min = 0;
  bool detected = false;
};

/// At each 2^m (2^m >= 32 n, 2^{m+1} <= cap) the left limit exceeds the value
/// at 2^m, and the curve falls from 2^m to a minimum in the first half of the
/// octave that is at least 1.2 times lower.
inline std::vector<JumpReport> fig2_jumps(int n, std::uint64_t xmax, const exact::Limits& lim = {}) {
  const auto table = exact::sum_table(n, xmax, lim);
  auto v = [&](std::uint64_t x) {
    return static_cast<long double>(x) * table.tail_ld(static_cast<std::int64_t>(x));
  };
  std::vector<JumpReport> out;
  for (int m = 1; (std::uint64_t{2} << m) <= xmax; ++m) {
    const std::uint64_t a = std::uint64_t{1} << m;
    if (a < 32u * static_cast<std::uint64_t>(n)) continue;
    JumpReport r;
    r.m = m;
    r.left = static_cast<long double>(a) * table.tail_ld(static_cast<std::int64_t>(a - 1));
    r.at = v(a);
    r.octave_min = r.at;
    std::uint64_t argmin = a;
    for (std::uint64_t x = a; x < 2 * a; x += 2) {
      const auto y = v(x);
      if (y < r.octave_min) r.octave_min = y, argmin = x;
    }
    r.detected = r.left > r.at && r.at >= 1.2L * r.octave_min && argmin < a + a / 2;
    out.push_back(r);
  }
  return out;
}

struct UniformBoundReport {
  std::vector<double> xs;
  std::vector<double> tails;
  double calibrated_C = 0;
};

/// Empirical tails of S_{n,r}/n - a_{n,gamma_n}^{(r)} and the smallest C
/// that makes the uniform bound hold on `xs`.
inline UniformBoundReport uniform_bound_check(std::uint64_t n, int r, double delta,
                                              std::span<const double> xs, std::uint64_t reps,
                                              std::uint64_t seed, unsigned threads = 0) {
  const auto et = simulate_trimmed({n, r, reps, seed, threads}, dist::GameParams::classical(),
                                   Normalization::centered);
  UniformBoundReport rep;
  rep.xs.assign(xs.begin(), xs.end());
  for (double x : xs) rep.tails.push_back(et.tail(x));
  rep.calibrated_C = asym::calibrate_uniform_C(r, delta, rep.xs, rep.tails);
  return rep;
}

}  // namespace stpete::mc
