#pragma once

// Semistable limit laws of St. Petersburg sums and trimmed sums.
//
// W_{j,gamma} depends on eta = 2^j / gamma only: its Levy measure has atoms
// at eta 2^-m (m >= 0) with mass 2^m / eta, fully compensated, plus drift
// log2(eta). W_gamma carries atoms at 2^i / gamma for every integer i.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "stpete/cf_inversion.hpp"
#include "stpete/errors.hpp"
#include "stpete/game.hpp"
#include "stpete/parallel.hpp"
#include "stpete/rng.hpp"

namespace stpete::limit {

using cf::cplx;

namespace detail {

inline void check_gamma(double gamma) {
  stpete::detail::require(gamma >= 0.5 && gamma <= 1.0, "gamma", "must lie in [1/2, 1]");
}

/// e^{iy} - 1 - iy without cancellation for small y.
inline cplx em1i(double y) {
  if (std::abs(y) < 0.1) {
    const double y2 = y * y;
    const double re = -y2 / 2 * (1 - y2 / 12 * (1 - y2 / 30 * (1 - y2 / 56)));
    const double im = -y * y2 / 6 * (1 - y2 / 20 * (1 - y2 / 42 * (1 - y2 / 72)));
    return {re, im};
  }
  const double s = std::sin(y / 2);
  return {-2 * s * s, std::sin(y) - y};
}

/// Largest m with gamma 2^m <= v, exact.
inline int floor_log2_over(double v, double gamma) {
  int m = dist::floor_log2(v / gamma);
  while (std::ldexp(gamma, m) > v) --m;
  while (std::ldexp(gamma, m + 1) <= v) ++m;
  return m;
}

}  // namespace detail

/// (j, gamma) indexing W_{j,gamma}.
struct SemistableParams {
  double gamma = 1.0;
  int j = 0;
  double eta() const { return std::ldexp(1.0, j) / gamma; }
};

// --- weights ---------------------------------------------------------------

/// p_{j,gamma} = e^{-gamma 2^-j} (1 - e^{-gamma 2^-j}).
inline double p_weight(int j, double gamma) {
  detail::check_gamma(gamma);
  const double lam = std::ldexp(gamma, -j);
  return std::exp(-lam) * -std::expm1(-lam);
}

/// P{M = m} for M Poisson(gamma 2^-j) conditioned on M >= 1.
inline double r_weight(int j, double gamma, int m) {
  detail::check_gamma(gamma);
  stpete::detail::require(m >= 1, "m", "must be at least 1");
  const double lam = std::ldexp(gamma, -j);
  return std::exp(m * std::log(lam) - std::lgamma(m + 1.0)) / std::expm1(lam);
}

// --- characteristic functions ---------------------------------------------

enum class LogCfBackend { atoms, taylor };

/// f_eta(t): the non-drift part of log E e^{it W_{j,gamma}}, eta = 2^j/gamma.
///
/// `atoms` sums the Levy atoms until t eta 2^-m < 1e-3 and closes the rest
/// with the power series of the remainder; `taylor` sums the full power
/// series in 50-digit arithmetic.
inline cplx log_cf_f(double eta, double t, LogCfBackend backend = LogCfBackend::atoms) {
  stpete::detail::require(eta > 0 && std::isfinite(eta), "eta", "must be positive");
  if (t == 0) return {0, 0};
  if (backend == LogCfBackend::taylor) {
    using F = boost::multiprecision::cpp_bin_float_50;
    const F te = F(t) * F(eta);
    F re = 0, im = 0;
    F pow_te = te;  // (t eta)^k / k!
    F two_k1 = 1;   // 2^{k-1}
    const double stop = 2 * std::abs(t * eta) + 10;
    for (int k = 2;; ++k) {
      pow_te *= te / k;
      two_k1 *= 2;
      const F term = pow_te / F(eta) * two_k1 / (two_k1 - 1);
      switch (k % 4) {
        case 0: re += term; break;
        case 1: im += term; break;
        case 2: re -= term; break;
        case 3: im -= term; break;
      }
      if (k > stop && abs(term) < F(1e-22)) break;
    }
    return {static_cast<double>(re), static_cast<double>(im)};
  }
  cplx sum{0, 0};
  int m = 0;
  for (; std::abs(t) * std::ldexp(eta, -m) >= 1e-3; ++m)
    sum += std::ldexp(1.0, m) / eta * detail::em1i(t * std::ldexp(eta, -m));
  // sum_{k>=2} (it)^k eta^{k-1}/k! * 2^{-m(k-1)} / (1 - 2^{-(k-1)}) over the atoms m' >= m
  const double y = t * std::ldexp(eta, -m);  // |y| < 1e-3
  cplx ipow{0, 1};
  ipow *= cplx(0, 1);  // i^2
  double yk = y * y, fact = 2;
  for (int k = 2; k <= 10; ++k) {
    const double geo = 1.0 / (1.0 - std::ldexp(1.0, -(k - 1)));
    sum += ipow * (yk / fact / std::ldexp(eta, -m) * geo);
    ipow *= cplx(0, 1);
    yk *= y;
    fact *= k + 1;
  }
  return sum;
}

/// E e^{it W} for W with parameter eta: exp(it log2 eta + f_eta(t)).
inline cplx cf_eta(double eta, double t, LogCfBackend backend = LogCfBackend::atoms) {
  return std::exp(cplx(0, t * std::log2(eta)) + log_cf_f(eta, t, backend));
}

inline cplx cf_Wjgamma(int j, double gamma, double t,
                       LogCfBackend backend = LogCfBackend::atoms) {
  detail::check_gamma(gamma);
  return cf_eta(SemistableParams{gamma, j}.eta(), t, backend);
}

/// Drift correction u_gamma.
inline double u_gamma(double gamma) {
  detail::check_gamma(gamma);
  const double g2 = gamma * gamma;
  double s = 0;
  for (int k = 1; k <= 40; ++k) s += g2 / (g2 + std::ldexp(1.0, 2 * k));
  for (int k = 0; k <= 40; ++k) s -= 1.0 / (1.0 + g2 * std::ldexp(1.0, 2 * k));
  return s;
}

/// E e^{it W_gamma}; Levy atoms 2^i/gamma truncated where their remainder
/// is below 1e-16.
inline cplx cf_Wgamma(double gamma, double t) {
  detail::check_gamma(gamma);
  if (t == 0) return {1, 0};
  const double drift = -std::log2(gamma) + u_gamma(gamma);
  const int i_lo = std::max(-400, static_cast<int>(std::floor(std::log2(1e-18 * gamma / (t * t)))) - 2);
  cplx e{0, t * drift};
  for (int i = i_lo; i <= 60; ++i) {
    const double x = std::ldexp(1.0, i) / gamma;
    const double mass = std::ldexp(gamma, -i);
    // e^{itx} - 1 - itx/(1+x^2) = (e^{itx} - 1 - itx) + itx * x^2/(1+x^2)
    e += mass * (detail::em1i(t * x) + cplx(0, t * x * (x * x / (1 + x * x))));
  }
  return std::exp(e);
}

// --- inverted laws ---------------------------------------------------------

struct Moments {
  double mean = 0;
  double variance = 0;
};

/// Density of W (parameter eta) on a grid wide enough to hold the mass.
inline cf::CdfCurve eta_curve(double eta, double dx = 0.01) {
  const double mu = std::log2(eta), sd = std::sqrt(2 * eta);
  const double lo = mu - 14 * sd - 2, hi = mu + 14 * sd + 12 * eta + 4;
  const auto count = static_cast<std::size_t>((hi - lo) / dx) + 2;
  cf::InversionOptions opt;
  opt.spread = sd + eta;
  cf::Inverter inv([eta](double t) { return cf_eta(eta, t); },
                   std::max(std::abs(lo), std::abs(hi)), opt);
  return inv.grid(lo, dx, count);
}

/// Mean and variance of W_{j,gamma} from its numerically inverted density.
inline Moments inverted_moments(double eta, double dx = 0.01) {
  const auto c = eta_curve(eta, dx);
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    m0 += c.density[i];
    m1 += c.x_at(i) * c.density[i];
  }
  const double mean = m1 / m0;
  double m2 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) m2 += (c.x_at(i) - mean) * (c.x_at(i) - mean) * c.density[i];
  return {mean, m2 / m0};
}

struct GridSpec {
  double lo = -12;
  double hi = 200;
  double dx = 0.02;
  std::size_t count() const { return static_cast<std::size_t>(std::ceil((hi - lo) / dx)) + 1; }
};

/// Tabulated G_{j,gamma} for every j carrying weight, plus the series
///   G_gamma(x)  = sum_j sum_m G_{j-1}(x - m 2^j/gamma) r_j(m) p_j
///   G*_gamma(x) = sum_j sum_m G_{j-1}(x - (m-1) 2^j/gamma) r_j(m) p_j.
/// G_j is built upward from a directly inverted G_{j_lo - 1} through
/// W_j = W_{j-1} + N 2^j/gamma, N ~ Poisson(gamma 2^-j).
class SemistableTables {
 public:
  explicit SemistableTables(double gamma, GridSpec grid = {}) : gamma_(gamma), grid_(grid) {
    detail::check_gamma(gamma);
    j_lo_ = static_cast<int>(std::floor(std::log2(gamma / 30.0)));  // e^{-gamma 2^-j} ~ 1e-13
    j_hi_ = 36;
    const std::size_t n = grid.count();

    // Base level by direct inversion on the window that holds its mass.
    const double eta0 = std::ldexp(1.0, j_lo_ - 1) / gamma;
    const double mu = std::log2(eta0), sd = std::sqrt(2 * eta0);
    const double wlo = std::max(grid.lo, mu - 14 * sd - 1), whi = std::min(grid.hi, mu + 14 * sd + 12 * eta0 + 2);
    cf::InversionOptions opt;
    opt.spread = sd + eta0;
    cf::Inverter inv([eta0](double t) { return cf_eta(eta0, t); },
                     std::max(std::abs(wlo), std::abs(whi)), opt);
    const auto i0 = static_cast<std::size_t>(std::floor((wlo - grid.lo) / grid.dx));
    const auto i1 = std::min(n - 1, static_cast<std::size_t>(std::ceil((whi - grid.lo) / grid.dx)));
    auto window = inv.grid(grid.lo + grid.dx * static_cast<double>(i0), grid.dx, i1 - i0 + 1);
    cf::CdfCurve base = blank();
    for (std::size_t i = 0; i < n; ++i) {
      if (i < i0) continue;
      if (i > i1) {
        base.cdf[i] = 1;
        continue;
      }
      base.cdf[i] = window.cdf[i - i0];
      base.density[i] = window.density[i - i0];
      base.error[i] = window.error[i - i0];
    }
    levels_.push_back(std::move(base));

    for (int j = j_lo_; j <= j_hi_; ++j) {
      const auto& prev = levels_.back();
      const double eta = std::ldexp(1.0, j) / gamma, lam = 1.0 / eta;
      cf::CdfCurve cur = blank();
      for (std::size_t i = 0; i < n; ++i) {
        const double x = prev.x_at(i);
        double pk = std::exp(-lam), acc_c = 0, acc_d = 0, mass = 0;
        for (int k = 0;; ++k) {
          const double z = x - k * eta;
          if (z < grid.lo) break;
          acc_c += pk * prev(z);
          acc_d += pk * prev.density_at(z);
          mass += pk;
          if (k > lam && 1 - mass < 1e-15) break;
          pk *= lam / (k + 1);
        }
        cur.cdf[i] = acc_c;
        cur.density[i] = acc_d;
      }
      levels_.push_back(std::move(cur));
    }

    gstar_ = mixture(0);
    gmix_ = mixture(1);
  }

  double gamma() const noexcept { return gamma_; }
  int j_lo() const noexcept { return j_lo_; }
  int j_hi() const noexcept { return j_hi_; }
  const GridSpec& grid() const noexcept { return grid_; }

  /// Tabulated G_{j,gamma}, j_lo - 1 <= j <= j_hi.
  const cf::CdfCurve& level(int j) const {
    stpete::detail::require(j >= j_lo_ - 1 && j <= j_hi_, "j", "outside the tabulated range");
    return levels_[static_cast<std::size_t>(j - j_lo_ + 1)];
  }

  double gstar(double x) const { return gstar_(x); }
  double g_mixture(double x) const { return gmix_(x); }
  const cf::CdfCurve& gstar_curve() const noexcept { return gstar_; }
  const cf::CdfCurve& g_mixture_curve() const noexcept { return gmix_; }

  /// Draw W*_gamma = W_{Y-1} + (M - 1) 2^Y/gamma (shift 1: W_gamma with M 2^Y/gamma).
  template <class Engine>
  double draw(Engine& eng, int shift = 0) const {
    // Y from p_j by inversion over the tabulated range.
    double u = uniform_open01(eng), acc = 0;
    int y = j_hi_;
    for (int j = j_lo_; j <= j_hi_; ++j) {
      acc += p_weight(j, gamma_);
      if (u <= acc) {
        y = j;
        break;
      }
    }
    const double lam = std::ldexp(gamma_, -y);
    std::poisson_distribution<long> pois(lam);
    long m = 0;
    while (m == 0) m = pois(eng);
    const auto& g = level(y - 1);
    // inverse transform on the tabulated CDF
    const double v = uniform_open01(eng);
    double lo = g.x0, hi = g.x_max();
    if (v >= g.cdf.back()) return hi + (m - 1 + shift) * std::ldexp(1.0, y) / gamma_;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) + static_cast<double>(m - 1 + shift) * std::ldexp(1.0, y) / gamma_;
  }

 private:
  cf::CdfCurve blank() const {
    cf::CdfCurve c;
    c.x0 = grid_.lo;
    c.dx = grid_.dx;
    const std::size_t n = grid_.count();
    c.cdf.assign(n, 0);
    c.density.assign(n, 0);
    c.error.assign(n, 0);
    return c;
  }

  cf::CdfCurve mixture(int shift) const {
    cf::CdfCurve out = blank();
    for (int j = j_lo_; j <= j_hi_; ++j) {
      const double pj = p_weight(j, gamma_);
      const double eta = std::ldexp(1.0, j) / gamma_, lam = 1.0 / eta;
      const auto& g = level(j - 1);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = out.x_at(i);
        double rm = lam / std::expm1(lam), mass = 0;
        for (int m = 1;; ++m) {
          const double z = x - (m - 1 + shift) * eta;
          if (z < grid_.lo) break;
          out.cdf[i] += pj * rm * g(z);
          out.density[i] += pj * rm * g.density_at(z);
          mass += rm;
          if (m > lam && 1 - mass < 1e-15) break;
          rm *= lam / (m + 1);
        }
      }
    }
    return out;
  }

  double gamma_;
  GridSpec grid_;
  int j_lo_ = 0, j_hi_ = 0;
  std::vector<cf::CdfCurve> levels_;
  cf::CdfCurve gstar_, gmix_;
};

/// G_gamma on a grid by direct inversion of its characteristic function.
inline cf::CdfCurve gamma_curve(double gamma, GridSpec grid = {}, unsigned threads = 1) {
  detail::check_gamma(gamma);
  cf::Inverter inv([gamma](double t) { return cf_Wgamma(gamma, t); },
                   std::max(std::abs(grid.lo), std::abs(grid.hi)));
  return inv.grid(grid.lo, grid.dx, grid.count(), threads);
}

/// G*_gamma(x). Builds the tables on each call; hold a SemistableTables for
/// repeated evaluation.
inline double gstar_cdf(double gamma, double x) {
  return SemistableTables(gamma).gstar(x);
}

// --- centering and constants ------------------------------------------------

/// Psi(k/gamma)/k = 2^{-floor(log2(k/gamma))} / gamma, exact.
inline double psi_ratio(std::uint64_t k, double gamma) {
  return std::ldexp(1.0, -detail::floor_log2_over(static_cast<double>(k), gamma)) / gamma;
}

/// A_{r,gamma} = sum_{k=1}^r Psi(k/gamma)/k.
inline double a_const(int r, double gamma) {
  stpete::detail::require(r >= 0, "r", "must be non-negative");
  stpete::detail::require(gamma > 0, "gamma", "must be positive");
  double s = 0;
  for (int k = 1; k <= r; ++k) s += psi_ratio(static_cast<std::uint64_t>(k), gamma);
  return s;
}

/// a_{n,gamma}^{(r)} = sum_{k=r+1}^n Psi(k/gamma)/k.
inline double centering(std::uint64_t n, double gamma, int r = 0) {
  stpete::detail::require(r >= 0 && static_cast<std::uint64_t>(r) < n, "r", "must satisfy 0 <= r < n");
  stpete::detail::require(gamma > 0, "gamma", "must be positive");
  long double s = 0;
  for (std::uint64_t k = static_cast<std::uint64_t>(r) + 1; k <= n; ++k) s += psi_ratio(k, gamma);
  return static_cast<double>(s);
}

/// a_{n,gamma}^{(0)} via the block decomposition over dyadic intervals.
inline double centering_closed(std::uint64_t n, double gamma) {
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(gamma > 0 && gamma <= 1, "gamma", "must lie in (0, 1]");
  const int mn = detail::floor_log2_over(static_cast<double>(n + 1), gamma);
  const long double g = gamma;
  long double s = mn + static_cast<long double>(n + 1) / std::ldexp(g, mn) - 1 / g;
  for (int m = 1; m <= mn; ++m) {
    const long double v = std::ldexp(g, m);
    s += (std::ceil(v) - v) / v;
  }
  return static_cast<double>(s);
}

struct XiF {
  double xi = 0;
  double f = 0;
};

/// xi(gamma) from the binary digits of gamma (representation with infinitely
/// many ones) and f(gamma) from its defining series. Both exact up to
/// rounding: a double gamma is dyadic, so both series are finite.
inline XiF xi_and_f(double gamma) {
  detail::check_gamma(gamma);
  // gamma = sum_k eps_k 2^-k; find the last 1 at position K (K = 0 for gamma = 1).
  long double weighted = 0;
  if (gamma == 1.0) {
    weighted = 2;
  } else {
    std::uint64_t bits = static_cast<std::uint64_t>(std::ldexp(gamma, 64));
    const int K = 64 - std::countr_zero(bits);
    for (int k = 1; k < K; ++k)
      if ((bits >> (64 - k)) & 1u) weighted += std::ldexp(static_cast<long double>(k), -k);
    weighted += std::ldexp(static_cast<long double>(K + 2), -K);  // digits k > K all ones
  }
  const long double g = gamma;
  XiF out;
  out.xi = static_cast<double>(2 - weighted / g - std::log2(g));
  long double f = 0;
  for (int m = 1; m <= 70; ++m) {
    const long double v = std::ldexp(g, m);
    f += (std::ceil(v) - v) / v;
  }
  out.f = static_cast<double>(f);
  return out;
}

// --- Chernoff bound ----------------------------------------------------------

/// h(x) = (2 + x) ln(1 + x/2) - x.
inline double chernoff_h(double x) {
  stpete::detail::require(x >= 0, "x", "must be non-negative");
  return (2 + x) * std::log1p(x / 2) - x;
}

/// e^{-h(x)/eta} with eta = 2^j / gamma.
inline double chernoff_bound(std::uint64_t n, int j, double gamma, double x) {
  stpete::detail::require(n >= 1, "n", "must be at least 1");
  stpete::detail::require(j >= 1 - dist::ceil_log2(n), "j", "must be at least 1 - ceil(log2 n)");
  stpete::detail::require(gamma > 0, "gamma", "must be positive");
  return std::exp(-chernoff_h(x) * gamma / std::ldexp(1.0, j));
}

inline double chernoff_bound(std::uint64_t n, int j, double x) {
  return chernoff_bound(n, j, dist::gamma_n(n), x);
}

// --- trimmed limit Y_{r,gamma} ---------------------------------------------

struct YSamplerOptions {
  std::uint64_t truncation = 10'000;  // N
  unsigned threads = 0;
  bool naive = false;  // walk all N arrivals explicitly
};

/// One draw of sum_{k=r+1}^N (Psi(Z_k/gamma)/Z_k - Psi(k/gamma)/k).
///
/// Psi(z/gamma)/z is constant on each [gamma 2^m, gamma 2^{m+1}), so beyond
/// gamma 2^3 only the arrival counts per dyadic block matter; these are
/// independent Poisson(gamma 2^m) variables.
template <class Engine>
double draw_Y(Engine& eng, int r, double gamma, std::uint64_t N, double centre, bool naive) {
  long double s = 0;
  std::uint64_t k = 0;
  double z = 0;
  const double z_switch = naive ? INFINITY : std::ldexp(gamma, 3);
  while (k < N) {
    const double next = z + exponential1(eng);
    if (next >= z_switch) break;
    z = next;
    ++k;
    if (k > static_cast<std::uint64_t>(r))
      s += std::ldexp(1.0, -detail::floor_log2_over(z, gamma)) / gamma;
  }
  for (int m = 3; k < N; ++m) {
    std::poisson_distribution<std::int64_t> pois(std::ldexp(gamma, m));
    const auto c = static_cast<std::uint64_t>(pois(eng));
    const std::uint64_t take = std::min(c, N - k);
    const std::uint64_t skipped =
        k >= static_cast<std::uint64_t>(r) ? 0 : std::min(take, static_cast<std::uint64_t>(r) - k);
    s += static_cast<long double>(take - skipped) * std::ldexp(1.0L, -m) / gamma;
    k += take;
  }
  return static_cast<double>(s - centre);
}

/// `reps` draws of the truncated Y_{r,gamma}; replicate i uses stream i.
inline std::vector<double> sample_Y(int r, double gamma, std::uint64_t reps, std::uint64_t seed,
                                    YSamplerOptions opt = {}) {
  stpete::detail::require(r >= 0, "r", "must be non-negative");
  stpete::detail::require(gamma > 0 && gamma <= 1, "gamma", "must lie in (0, 1]");
  stpete::detail::require(opt.truncation >= static_cast<std::uint64_t>(r) + 1, "truncation",
                          "must be at least r + 1");
  stpete::detail::require(reps >= 1, "reps", "must be at least 1");
  const double centre = centering(opt.truncation, gamma, r);
  std::vector<double> out(reps);
  parallel_for(reps, opt.threads, [&](std::size_t i) {
    auto eng = Xoshiro256::for_stream(seed, i);
    out[i] = draw_Y(eng, r, gamma, opt.truncation, centre, opt.naive);
  });
  return out;
}

struct YTailRhs {
  double leading = 0;  // 2^{(r+1){log2(gamma x)}} / ((r+1)! x^{r+1})
  double bracket = 0;
  double value = 0;
  double inner[2] = {0, 0};  // P{Y_0 + A_r > x(1 - 2^{l - {log2(gamma x)}})}, l = 0, 1
};

/// Tail asymptote of Y_{r,gamma}. `inner_tail(z)` must return P{Y_{0,gamma} > z}.
inline YTailRhs y_tail_rhs(int r, double gamma, double x,
                           const std::function<double(double)>& inner_tail) {
  stpete::detail::require(r >= 0, "r", "must be non-negative");
  stpete::detail::require(gamma > 0 && gamma <= 1, "gamma", "must lie in (0, 1]");
  stpete::detail::require(gamma * x >= 2, "x", "needs gamma * x >= 2");
  const double fr = dist::frac_log2(gamma * x);
  const double e = r + 1;
  const double A = a_const(r, gamma);
  YTailRhs out;
  out.leading = std::pow(2.0, fr * e) / (std::tgamma(e + 1) * std::pow(x, e));
  double b = std::pow(2.0, -e);
  for (int l = 0; l <= 1; ++l) {
    out.inner[l] = inner_tail(x * (1 - std::pow(2.0, l - fr)) - A);
    b += (std::pow(2.0, e) - 1) * std::pow(2.0, -l * e) * out.inner[l];
  }
  out.bracket = b;
  out.value = out.leading * b;
  return out;
}

}  // namespace stpete::limit
