#pragma once

// The fourteen acceptance checks, shared by the acceptance test binary and
// the repro-all command.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stpete/asymptotics.hpp"
#include "stpete/exact.hpp"
#include "stpete/fixtures.hpp"
#include "stpete/game.hpp"
#include "stpete/limitlaw.hpp"
#include "stpete/montecarlo.hpp"

namespace stpete::acceptance {

struct CheckResult {
  int id = 0;
  std::string name;
  std::string target;
  std::string measured;
  bool pass = false;
  double seconds = 0;
};

/// Runs a command line (argv without the program name) and returns its exit
/// code. Needed by the determinism check only.
using CliRunner = std::function<int(const std::vector<std::string>&)>;

namespace detail {

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

template <class F>
CheckResult timed(int id, std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.pass = false;
    r.measured = std::string("error: ") + e.what();
  }
  r.id = id;
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

using fixtures::Config;
using detail::fmt;

inline CheckResult closed_forms(const Config&) {
  return detail::timed(1, "two-sum closed form", [] {
    const auto table = exact::sum_table(2, 8192);
    int bad = 0, total = 0;
    for (int k = 1; k <= 12; ++k)
      for (int l = k; l <= 12; ++l, ++total) {
        const auto x = (std::uint64_t{1} << k) + (std::uint64_t{1} << l);
        if (!(table.tail(static_cast<std::int64_t>(x)) == exact::two_sum_tail_closed(k, l))) ++bad;
      }
    return CheckResult{0, "", "exact equality for 1<=k<=l<=12",
                       std::to_string(total - bad) + "/" + std::to_string(total) + " equal", bad == 0};
  });
}

inline CheckResult oracle_equivalence(const Config&) {
  return detail::timed(2, "DP vs enumeration", [] {
    int bad = 0, total = 0;
    for (int n = 1; n <= 4; ++n)
      for (int r = 0; r <= std::min(2, n - 1); ++r) {
        const auto table = exact::trimmed_table(n, r, 64);
        for (std::uint64_t x = 2; x <= 64; ++x, ++total)
          if (!(table.tail(static_cast<std::int64_t>(x)) == exact::enum_oracle(n, r, x))) ++bad;
      }
    return CheckResult{0, "", "exact equality, n<=4, r<=2, x in 2..64",
                       std::to_string(total - bad) + "/" + std::to_string(total) + " equal", bad == 0};
  });
}

inline CheckResult theorem1_ratio(const Config& c) {
  return detail::timed(3, "trimmed tail ratio", [&] {
    bool ok = true;
    std::string m;
    for (int e = 10; e <= 14; ++e) {
      const std::uint64_t x = 3u << e;
      const auto ex = exact::trimmed_tail_exact(4, 1, x).to_long_double();
      const auto rhs = asym::snr_tail_rhs(4, 1, static_cast<double>(x));
      const double ratio = static_cast<double>(ex / rhs.value);
      ok = ok && std::abs(ratio - 1) <= c.theorem1_tol;
      m += (m.empty() ? "" : " ") + fmt(ratio, 5);
    }
    return CheckResult{0, "", "P{S_4,1>x}/rhs in [1-" + fmt(c.theorem1_tol) + ", 1+" +
                                  fmt(c.theorem1_tol) + "] at x=3*2^10..3*2^14",
                       m, ok};
  });
}

inline CheckResult oscillation_band(const Config& c) {
  return detail::timed(4, "x P{S_n>x} band", [&] {
    const std::uint64_t cap = std::uint64_t{1} << c.band_cap_log2;
    bool ok = true;
    std::string m;
    for (int n : {2, 4, 16}) {
      const auto table = exact::sum_table(n, cap);
      long double band_lo = 1e300L, band_hi = 0;
      for (std::uint64_t x = 4096; x <= cap; ++x) {
        const double f = dist::frac_log2(static_cast<double>(x));
        if (f <= 0.1 || f >= 0.9) continue;
        const long double v = static_cast<long double>(x) * table.tail_ld(static_cast<std::int64_t>(x));
        band_lo = std::min(band_lo, v);
        band_hi = std::max(band_hi, v);
      }
      // endpoints in the top octave
      const std::uint64_t a = cap / 2;
      long double lo = 1e300L, hi = 0;
      for (std::uint64_t x = a; x < cap; ++x) {
        const long double v = static_cast<long double>(x) * table.tail_ld(static_cast<std::int64_t>(x));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const bool band_ok = band_lo >= 0.999L * n && band_hi <= 2.0L * n * 1.05L;
      const bool ends_ok = lo <= 1.02L * n && hi >= 0.98L * 2 * n;
      ok = ok && band_ok && ends_ok;
      m += "n=" + std::to_string(n) + ": band [" + fmt(static_cast<double>(band_lo / n), 4) + "n, " +
           fmt(static_cast<double>(band_hi / n), 4) + "n], octave min/max " +
           fmt(static_cast<double>(lo / n), 4) + "n/" + fmt(static_cast<double>(hi / n), 4) + "n; ";
    }
    return CheckResult{0, "", "band [0.999n, 2.1n]; min <= 1.02n, max >= 1.96n in top octave", m, ok};
  });
}

inline CheckResult conv_ratios(const Config&) {
  return detail::timed(5, "convolution ratios", [] {
    const std::uint64_t xs[] = {4096, 4095};
    const auto pts = exact::conv_ratio_curve(xs);
    const double a = static_cast<double>(pts[0].ratio), b = static_cast<double>(pts[1].ratio);
    return CheckResult{0, "", "ratio(2^12) within 1% of 4, ratio(2^12-1) within 1% of 2",
                       fmt(a) + ", " + fmt(b), std::abs(a / 4 - 1) <= 0.01 && std::abs(b / 2 - 1) <= 0.01};
  });
}

inline CheckResult weights(const Config& c) {
  return detail::timed(6, "weight normalization", [&] {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ug(0.5, 1.0);
    std::uniform_int_distribution<int> uj(-10, 10);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double g = ug(rng);
      const int j = uj(rng);
      double sp = 0;
      for (int k = -60; k <= 60; ++k) sp += limit::p_weight(k, g);
      double sr = 0;
      for (int m = 1;; ++m) {
        const double t = limit::r_weight(j, g, m);
        sr += t;
        if (t < 1e-18 && m > std::ldexp(g, -j)) break;
      }
      worst = std::max({worst, std::abs(sp - 1), std::abs(sr - 1)});
    }
    return CheckResult{0, "", "|sum - 1| <= " + fmt(c.weight_tol) + " for 50 draws",
                       "max |sum - 1| = " + fmt(worst, 3), worst <= c.weight_tol};
  });
}

inline CheckResult cf_machinery(const Config& c) {
  return detail::timed(7, "CF inversion cumulants", [&] {
    double worst = 0;
    for (auto [j, g] : {std::pair{0, 1.0}, std::pair{1, 0.75}, std::pair{-1, 0.6}}) {
      const double eta = std::ldexp(1.0, j) / g;
      const auto mo = limit::inverted_moments(eta);
      worst = std::max({worst, std::abs(mo.mean - std::log2(eta)), std::abs(mo.variance - 2 * eta)});
    }
    double diff = 0;
    for (double eta = 0.5; eta <= 4.0; eta += 0.25)
      for (double t = -10; t <= 10; t += 0.25)
        diff = std::max(diff, std::abs(limit::log_cf_f(eta, t) -
                                       limit::log_cf_f(eta, t, limit::LogCfBackend::taylor)));
    return CheckResult{0, "",
                       "moment error <= " + fmt(c.moment_tol) + ", backend gap <= " + fmt(c.backend_tol),
                       "moment error " + fmt(worst, 3) + ", backend gap " + fmt(diff, 3),
                       worst <= c.moment_tol && diff <= c.backend_tol};
  });
}

inline CheckResult merging(const Config& c) {
  return detail::timed(8, "merging KS", [&] {
    const std::uint64_t big = std::uint64_t{1} << c.merge_log2_n;
    const std::uint64_t small = std::uint64_t{1} << c.merge_small_log2_n;
    const auto a = mc::merge_check(big, c.merge_reps, c.seed, c.threads);
    const auto b = mc::merge_check(small, c.merge_reps, c.seed, c.threads);
    const auto ta = mc::trimmed_merge_check(big, c.merge_reps, c.seed + 1, c.threads);
    const auto tb = mc::trimmed_merge_check(small, c.merge_reps, c.seed + 1, c.threads);
    const bool ok = a.ks <= c.ks_tol && ta.ks <= c.ks_tol && a.ks < b.ks && ta.ks < tb.ks;
    return CheckResult{0, "",
                       "KS <= " + fmt(c.ks_tol) + " at n=2^" + std::to_string(c.merge_log2_n) +
                           ", smaller than at n=2^" + std::to_string(c.merge_small_log2_n),
                       "sum " + fmt(a.ks, 4) + " (vs " + fmt(b.ks, 4) + "), trimmed " + fmt(ta.ks, 4) +
                           " (vs " + fmt(tb.ks, 4) + ")",
                       ok};
  });
}

inline CheckResult y_tail(const Config& c) {
  return detail::timed(9, "trimmed-limit tail", [&] {
    limit::YSamplerOptions opt;
    opt.truncation = c.y_truncation;
    opt.threads = c.threads;
    const mc::EmpiricalTail y(limit::sample_Y(0, 1.0, c.y_samples, c.seed, opt));
    auto inner = [&](double z) { return y.tail(z); };
    bool ok = true;
    std::string m = "ratio";
    for (double x : {96.0, 192.0}) {
      const auto rhs = limit::y_tail_rhs(0, 1.0, x, inner);
      const double ratio = y.tail(x) / rhs.value;
      ok = ok && std::abs(ratio - 1) <= c.y_ratio_tol;
      m += " " + fmt(ratio, 4) + " (ci " + fmt(y.ci_halfwidth(x) / rhs.value, 2) + ")";
    }
    double lo = 1e9, hi = 0;
    for (int k = 32; k <= 56; ++k) {  // x = 2^{k/8}, 16 .. 128
      const double x = std::exp2(k / 8.0);
      const double v = x * y.tail(x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ok = ok && lo >= 0.9 && hi <= 2.2;
    m += "; sweep x P in [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "]";
    return CheckResult{0, "", "ratio in [0.9, 1.1] at x=96,192; x P in [0.9, 2.2] on 16..128", m, ok};
  });
}

inline CheckResult centering_xi(const Config& c) {
  return detail::timed(10, "centering and xi", [&] {
    const bool exact8 = limit::centering(8, 1.0, 0) == 3.125;
    std::mt19937_64 rng(c.seed + 10);
    std::uniform_real_distribution<double> ug(0.5, 1.0);
    std::uniform_int_distribution<std::uint64_t> un(1, 10000);
    double dc = 0, dxi = 0;
    for (int i = 0; i < 200; ++i) {
      const auto n = un(rng);
      const double g = std::nextafter(ug(rng), 2.0);
      dc = std::max(dc, std::abs(limit::centering(n, g, 0) - limit::centering_closed(n, g)));
    }
    for (int i = 0; i < 100; ++i) {
      const double g = std::nextafter(ug(rng), 2.0);
      const auto v = limit::xi_and_f(g);
      dxi = std::max(dxi, std::abs(v.f - (v.xi + std::log2(g) - 1 + 1 / g)));
    }
    const double f34 = limit::xi_and_f(0.75).f;
    const bool ok = exact8 && dc <= 1e-12 && dxi <= 1e-10 && std::abs(f34 - 1.0 / 3) <= 1e-15;
    return CheckResult{0, "", "a(8)=3.125; closed form 1e-12; identity 1e-10; f(3/4)=1/3",
                       std::string("a(8)=") + fmt(limit::centering(8, 1.0, 0), 17) + ", closed gap " +
                           fmt(dc, 3) + ", identity gap " + fmt(dxi, 3) + ", f(3/4)=" + fmt(f34, 17),
                       ok};
  });
}

inline CheckResult chernoff(const Config& c) {
  return detail::timed(11, "Chernoff bound", [&] {
    const double xs[] = {0.5, 1, 2, 4};
    int violations = 0;
    std::string m;
    for (int j : {0, 1}) {
      const auto rows = mc::chernoff_check(1024, j, xs, c.chernoff_reps, c.seed + 11 + j, c.threads);
      for (const auto& r : rows) {
        violations += r.violated;
        m += fmt(r.empirical, 3) + "<=" + fmt(r.bound, 3) + " ";
      }
    }
    bool sandwich = true;
    for (int i = 0; i <= 50000; ++i) {
      const double x = i * 1e-3;
      const double h = limit::chernoff_h(x);
      sandwich = sandwich && x * x / (4 + x) <= h * (1 + 1e-12) && h <= x * x / 2 * (1 + 1e-12);
    }
    m += "; violations " + std::to_string(violations) + (sandwich ? ", sandwich holds" : ", sandwich fails");
    return CheckResult{0, "", "0 violations at n=2^10, j in {0,1}; x^2/(4+x) <= h <= x^2/2", m,
                       violations == 0 && sandwich};
  });
}

inline CheckResult generalized(const Config& c) {
  return detail::timed(12, "generalized game", [&] {
    const dist::GameParams g(1.0, 1.0 / 3);
    const auto lim = asym::subexp_limits(g);
    const bool lim_ok = lim.first == 2.0 && lim.second == 3.0;
    const double x1 = 10, x2 = 10 * std::pow(1.5, 8);
    const double r1 = static_cast<double>(asym::gen_snr_tail_rhs(3, 0, x1, g).value /
                                          exact::enum_oracle(3, 0, x1, g));
    const double r2 = static_cast<double>(asym::gen_snr_tail_rhs(3, 0, x2, g).value /
                                          exact::enum_oracle(3, 0, x2, g));
    const bool ok = lim_ok && std::abs(r1 - 1) <= c.gen_tol_small_x && std::abs(r2 - 1) <= c.gen_tol_large_x;
    return CheckResult{0, "",
                       "limits (2, 3); rhs/enum within " + fmt(c.gen_tol_small_x) + " at x=10, " +
                           fmt(c.gen_tol_large_x) + " at x=10*1.5^8",
                       "limits (" + fmt(lim.first, 17) + ", " + fmt(lim.second, 17) + "); ratios " +
                           fmt(r1, 5) + ", " + fmt(r2, 5),
                       ok};
  });
}

inline CheckResult figures(const Config& c) {
  return detail::timed(13, "figure structure", [&] {
    const auto jumps = mc::fig2_jumps(16, c.fig2_xmax);
    int found = 0;
    for (const auto& j : jumps) found += j.detected;
    const auto xs = mc::fig2_grid(c.fig2_xmax);
    const auto curve = mc::oscillation_curve_fig2(16, xs);
    bool band = true;
    for (const auto& p : curve) {
      if (p.x < 512) continue;
      band = band && p.value >= 16 && p.value <= 64;
      const double f = dist::frac_log2(static_cast<double>(p.x));
      if (p.x >= 4096 && f > 0.1 && f < 0.9) band = band && p.value <= 2.1L * 16;
    }
    const auto h = mc::histogram_fig1(128, c.fig1_reps, c.seed + 13, c.fig1_bin, c.threads);
    const int lobes = h.sum.peaks_above(h.side_lobe_threshold - 1, 20);
    const bool ok = !jumps.empty() && found == static_cast<int>(jumps.size()) && band &&
                    h.side_lobe_ratio < c.fig1_ratio_max && lobes >= 2;
    return CheckResult{0, "", "jump at every 2^m; bands; fig1 side-lobe ratio < " + fmt(c.fig1_ratio_max),
                       "jumps " + std::to_string(found) + "/" + std::to_string(jumps.size()) +
                           (band ? ", bands hold" : ", band violated") + ", side-lobe ratio " +
                           fmt(h.side_lobe_ratio, 4) + ", lobes " + std::to_string(lobes),
                       ok};
  });
}

/// Reruns stochastic subcommands with 1 and 3 workers and compares bytes.
inline CheckResult determinism(const Config& c, const CliRunner& cli, const std::string& scratch) {
  return detail::timed(14, "thread-count determinism", [&] {
    if (!cli) return CheckResult{0, "", "byte-identical output", "no command runner", false};
    const std::string seed = std::to_string(c.seed);
    const std::string reps = std::to_string(c.determinism_reps);
    const std::vector<std::vector<std::string>> cmds = {
        {"mc-sim", "--n", "64", "--r", "1", "--reps", reps, "--seed", seed},
        {"sample-y", "--r", "1", "--gamma", "0.75", "--reps", reps, "--seed", seed},
        {"max-check", "--n", "256", "--reps", reps, "--seed", seed},
        {"fig1", "--n", "128", "--reps", reps, "--seed", seed},
    };
    int same = 0;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      std::string bodies[2];
      for (int k = 0; k < 2; ++k) {
        const std::string path = scratch + "/det_" + std::to_string(i) + "_" + std::to_string(k);
        auto argv = cmds[i];
        argv.insert(argv.end(), {"--threads", k == 0 ? "1" : "3", "--out", path});
        if (cli(argv) != 0) return CheckResult{0, "", "byte-identical output", "command failed: " + cmds[i][0], false};
        std::ifstream in(path, std::ios::binary);
        bodies[k].assign(std::istreambuf_iterator<char>(in), {});
        std::remove(path.c_str());
      }
      same += !bodies[0].empty() && bodies[0] == bodies[1];
    }
    return CheckResult{0, "", "byte-identical output for 1 and 3 workers",
                       std::to_string(same) + "/" + std::to_string(cmds.size()) + " identical",
                       same == static_cast<int>(cmds.size())};
  });
}

inline std::vector<CheckResult> run_all(const Config& c, const CliRunner& cli, const std::string& scratch) {
  return {closed_forms(c), oracle_equivalence(c), theorem1_ratio(c), oscillation_band(c),
          conv_ratios(c),  weights(c),            cf_machinery(c),   merging(c),
          y_tail(c),       centering_xi(c),       chernoff(c),       generalized(c),
          figures(c),      determinism(c, cli, scratch)};
}

inline std::string format_line(const CheckResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << r.name << " | target: " << r.target
     << " | measured: " << r.measured << " | " << std::fixed << std::setprecision(1) << r.seconds << " s";
  return os.str();
}

}  // namespace stpete::acceptance
