#pragma once

// Distribution functions from characteristic functions.
//
//   F(x) = 1/2 - (1/pi) int_0^inf Im(e^{-itx} phi(t)) / t dt
//   f(x) =       (1/pi) int_0^inf Re(e^{-itx} phi(t)) dt
//
// phi is sampled once on composite Gauss-Kronrod (7/15) panels over [0, T];
// the first panel is refined geometrically towards 0, and T is the point past
// which |phi| stays below the cutoff. The error estimate per x is the
// Kronrod-Gauss difference plus a truncation term.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "stpete/errors.hpp"
#include "stpete/parallel.hpp"

namespace stpete::cf {

using cplx = std::complex<double>;
using CharFn = std::function<cplx(double)>;

struct InversionOptions {
  double cutoff = 1e-13;        // |phi(t)| below this is treated as 0
  double spread = 1.0;          // rough width of the law; sets the panel width
  double max_t = 1e5;
  std::size_t max_nodes = 4'000'000;
};

struct CdfPoint {
  double x = 0;
  double cdf = 0;
  double error = 0;
  double density = 0;
};

/// Tabulated distribution function on a uniform grid; evaluation by cubic
/// Hermite interpolation using the density, clamped outside the grid.
struct CdfCurve {
  double x0 = 0;
  double dx = 1;
  std::vector<double> cdf;
  std::vector<double> density;
  std::vector<double> error;

  std::size_t size() const noexcept { return cdf.size(); }
  double x_at(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  double x_max() const { return x_at(cdf.size() - 1); }
  double max_error() const { return error.empty() ? 0 : *std::max_element(error.begin(), error.end()); }

  double operator()(double x) const {
    if (cdf.empty()) return 0;
    if (x <= x0) return cdf.front();
    const double u = (x - x0) / dx;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= cdf.size()) return cdf.back();
    const double s = u - static_cast<double>(i);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    const double v = h00 * cdf[i] + h10 * dx * density[i] + h01 * cdf[i + 1] +
                     h11 * dx * density[i + 1];
    return std::clamp(v, 0.0, 1.0);
  }

  double density_at(double x) const {
    if (density.empty() || x < x0 || x > x_max()) return 0;
    const double u = (x - x0) / dx;
    const auto i = std::min(static_cast<std::size_t>(u), density.size() - 2);
    const double s = u - static_cast<double>(i);
    return (1 - s) * density[i] + s * density[i + 1];
  }
};

class Inverter {
 public:
  /// `x_abs_max` bounds |x| for later queries; it fixes the panel width.
  Inverter(CharFn phi, double x_abs_max, InversionOptions opt = {}) : opt_(opt) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto& ka = GK::abscissa();
    const auto& kw = GK::weights();
    // 7-point Gauss weights on the even Kronrod abscissae.
    constexpr double gw[4] = {0.417959183673469387755102040816, 0.381830050505118944950369775489,
                              0.279705391489276667901467771424, 0.129484966168869693270611432679};

    const double h = 3.0 / (std::abs(x_abs_max) + opt.spread + 1.0);
    auto add_panel = [&](double a, double b) {
      const double c = 0.5 * (a + b), r = 0.5 * (b - a);
      for (std::size_t i = 0; i < ka.size(); ++i) {
        const double g = (i % 2 == 0) ? gw[i / 2] : 0.0;
        for (int sgn : {-1, 1}) {
          if (i == 0 && sgn == 1) continue;
          const double t = c + sgn * r * ka[i];
          t_.push_back(t);
          wk_.push_back(r * kw[i]);
          wg_.push_back(r * g);
        }
      }
    };
    for (int k = 40; k >= 1; --k) add_panel(std::ldexp(h, -k), std::ldexp(h, -k + 1));

    auto small_from = [&](double t) {
      for (double f : {1.0, 1.1, 1.25, 1.5, 2.0})
        if (std::abs(phi(t * f)) >= opt.cutoff) return false;
      return true;
    };
    double a = h;
    while (!small_from(a)) {
      add_panel(a, a + h);
      a += h;
      if (a > opt.max_t || t_.size() > opt.max_nodes)
        throw convergence_error("characteristic function does not decay below cutoff by t = " +
                                std::to_string(a));
    }
    cutoff_t_ = a;
    phi_.resize(t_.size());
    for (std::size_t i = 0; i < t_.size(); ++i) phi_[i] = phi(t_[i]);
  }

  double cutoff_t() const noexcept { return cutoff_t_; }
  std::size_t nodes() const noexcept { return t_.size(); }

  CdfPoint at(double x) const {
    double ik = 0, ig = 0, dk = 0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      const cplx v = std::polar(1.0, -t_[i] * x) * phi_[i];
      const double im = v.imag() / t_[i];
      ik += wk_[i] * im;
      ig += wg_[i] * im;
      dk += wk_[i] * v.real();
    }
    return finish(x, ik, ig, dk);
  }

  /// F on the uniform grid lo, lo + dx, ..., count points.
  CdfCurve grid(double lo, double dx, std::size_t count, unsigned threads = 1) const {
    stpete::detail::require(count >= 2, "count", "grid needs at least two points");
    stpete::detail::require(dx > 0, "dx", "must be positive");
    CdfCurve c;
    c.x0 = lo;
    c.dx = dx;
    c.cdf.resize(count);
    c.density.resize(count);
    c.error.resize(count);
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (count + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
      const std::size_t k0 = b * kBlock, k1 = std::min(count, k0 + kBlock);
      std::vector<cplx> cur(t_.size()), rot(t_.size());
      for (std::size_t i = 0; i < t_.size(); ++i) {
        cur[i] = std::polar(1.0, -t_[i] * (lo + dx * static_cast<double>(k0))) * phi_[i];
        rot[i] = std::polar(1.0, -t_[i] * dx);
      }
      for (std::size_t k = k0; k < k1; ++k) {
        double ik = 0, ig = 0, dk = 0;
        for (std::size_t i = 0; i < t_.size(); ++i) {
          const double im = cur[i].imag() / t_[i];
          ik += wk_[i] * im;
          ig += wg_[i] * im;
          dk += wk_[i] * cur[i].real();
          cur[i] *= rot[i];
        }
        const auto p = finish(lo + dx * static_cast<double>(k), ik, ig, dk);
        c.cdf[k] = p.cdf;
        c.density[k] = p.density;
        c.error[k] = p.error;
      }
    });
    return c;
  }

 private:
  CdfPoint finish(double x, double ik, double ig, double dk) const {
    CdfPoint p;
    p.x = x;
    p.cdf = 0.5 - ik / std::numbers::pi;
    p.density = dk / std::numbers::pi;
    p.error = std::abs(ik - ig) / std::numbers::pi + opt_.cutoff / cutoff_t_;
    return p;
  }

  InversionOptions opt_;
  double cutoff_t_ = 0;
  std::vector<double> t_, wk_, wg_;
  std::vector<cplx> phi_;
};

/// One-off inversion at a single point.
inline CdfPoint cdf_from_cf(const CharFn& phi, double x, InversionOptions opt = {}) {
  return Inverter(phi, x, opt).at(x);
}

}  // namespace stpete::cf
