#pragma once

// Command-line front end. Requires the vendored CLI11 and nlohmann/json
// headers on the include path.
//
// Exit codes: 0 success, 1 failed checks (repro-all), 2 invalid input
// (the message names the flag), 3 numerical non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stpete/acceptance.hpp"
#include "stpete/asymptotics.hpp"
#include "stpete/cf_inversion.hpp"
#include "stpete/errors.hpp"
#include "stpete/exact.hpp"
#include "stpete/fixtures.hpp"
#include "stpete/game.hpp"
#include "stpete/limitlaw.hpp"
#include "stpete/montecarlo.hpp"

namespace stpete::cli {

using json = nlohmann::ordered_json;

/// Subcommand -> library operations it exposes. Each operation appears once.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& coverage() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
      {"tail", {"cdf", "tail", "psi", "truncated_cdf", "truncated_moment"}},
      {"quantile", {"quantile"}},
      {"exact-tail", {"sum_tail_exact"}},
      {"trimmed-tail", {"trimmed_tail_exact", "enum_oracle"}},
      {"conv-ratio", {"conv_ratio_curve", "two_sum_tail_closed"}},
      {"asym-tail", {"snr_tail_rhs"}},
      {"finer-as", {"finer_as_rhs"}},
      {"subexp-limits", {"subexp_limits"}},
      {"gen-tail", {"gen_snr_tail_rhs"}},
      {"limit-cdf", {"p_weight", "r_weight", "log_cf_f", "cf_Wjgamma", "cf_Wgamma", "cdf_from_cf"}},
      {"gstar-cdf", {"gstar_cdf"}},
      {"sample-y", {"sample_Y"}},
      {"y-tail", {"y_tail_rhs"}},
      {"centering", {"centering", "centering_closed", "a_const", "gamma_n"}},
      {"xi", {"xi_and_f"}},
      {"chernoff", {"chernoff_h", "chernoff_bound"}},
      {"mc-sim", {"simulate_trimmed", "sample", "uniform_bound_rhs"}},
      {"merge-check", {"merge_check"}},
      {"trimmed-merge-check", {"trimmed_merge_check"}},
      {"max-check", {"max_pmf_check"}},
      {"chernoff-check", {"chernoff_check"}},
      {"fig1", {"histogram_fig1"}},
      {"fig2", {"oscillation_curve_fig2"}},
      {"repro-all", {"repro_all"}},
  };
  return table;
}

namespace detail {

inline std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
inline std::string num(long double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

/// Output sink: stdout, or a file written through a temporary and renamed
/// into place on success.
class Sink {
 public:
  explicit Sink(std::string path) : path_(std::move(path)) {
    if (!path_.empty()) {
      tmp_ = path_ + ".partial";
      file_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary | std::ios::trunc);
      if (!*file_) throw invalid_argument("out", "cannot write " + path_);
    }
  }
  ~Sink() {
    if (file_ && !committed_) {
      file_->close();
      std::remove(tmp_.c_str());
    }
  }
  std::ostream& os() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }
  void commit() {
    if (file_) {
      file_->close();
      std::filesystem::rename(tmp_, path_);
      committed_ = true;
    }
  }

 private:
  std::string path_, tmp_;
  std::unique_ptr<std::ofstream> file_;
  bool committed_ = false;
};

/// x grid from an explicit list or a dyadic spec "m0:m1:points_per_octave".
inline std::vector<double> grid(const std::vector<double>& list, const std::string& dyadic) {
  if (!dyadic.empty()) {
    int m0 = 0, m1 = 0, ppo = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(dyadic);
    if (!(ss >> m0 >> c1 >> m1 >> c2 >> ppo) || c1 != ':' || c2 != ':' || m0 >= m1 || ppo < 1)
      throw invalid_argument("x-dyadic", "expected m0:m1:points_per_octave with m0 < m1");
    std::vector<double> xs;
    for (int m = m0; m < m1; ++m)
      for (int k = 0; k < ppo; ++k) xs.push_back(std::exp2(m + static_cast<double>(k) / ppo));
    xs.push_back(std::exp2(m1));
    return xs;
  }
  if (list.empty()) throw invalid_argument("x", "give --x values or --x-dyadic");
  return list;
}

inline std::vector<std::uint64_t> int_grid(const std::vector<double>& xs) {
  std::vector<std::uint64_t> out;
  for (double x : xs) {
    if (!(x >= 0) || x != std::floor(x) || x > 9.0e15) throw invalid_argument("x", "must be a non-negative integer");
    out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

inline dist::GameParams game(double alpha, double p) { return dist::GameParams(alpha, p); }

inline std::string header(std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::string h = "#";
  for (const auto& [k, v] : kv) h += std::string(" ") + k + "=" + v;
  return h + "\n";
}

struct Common {
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

}  // namespace detail

/// Parses and executes one command line (argv[0] is the program name).
inline int run(int argc, const char* const* argv) {
  using namespace detail;
  CLI::App app{"St. Petersburg sums, trimmed sums and their semistable limits"};
  app.require_subcommand(1);
  std::function<void()> action;
  // Commands report their own sink; state lives for the whole call.
  Common common;
  auto add_out = [&](CLI::App* s, bool formats) {
    s->add_option("--out", common.out, "output file (default stdout)");
    if (formats) s->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", common.threads, "worker count (results do not depend on it)");
  };

  // shared parameter storage
  std::vector<double> xs, ss, ts;
  std::string x_dyadic;
  double alpha = 1.0, p = 0.5, gamma = 0, c = 0, delta = 0, bin = 0.25, lo = -10, hi = 60, dx = 0.05;
  int n = 0, r = 0, k = 0, l = 0, m = 0, j = 0, ell = 0, jmin = -3, jmax = 6, ppo = 64;
  bool has_j = false, naive = false, oracle = false;
  std::uint64_t nn = 0, reps = 0, seed = 0, truncation = 10'000, xmax = 16384, cap = exact::kDefaultCap,
                draws = 0;
  std::string what = "cdf", norm = "raw", config = "config/repro_default.cfg", scratch;

  auto add_x = [&](CLI::App* s) {
    s->add_option("--x", xs, "x values");
    s->add_option("--x-dyadic", x_dyadic, "grid m0:m1:points_per_octave on the log2 scale");
  };
  auto add_game = [&](CLI::App* s) {
    s->add_option("--alpha", alpha, "payoff exponent");
    s->add_option("--p", p, "head probability");
  };
  auto add_seed = [&](CLI::App* s) {
    s->add_option("--seed", seed, "master seed")->required();
    s->add_option("--reps", reps, "replicates")->required();
    add_threads(s);
  };

  // tail
  {
    auto* s = app.add_subcommand("tail", "CDF, tail and Psi of the payoff; truncated law");
    add_x(s), add_game(s), add_out(s, false);
    s->add_option("--k", k, "truncation level for the conditional law F_k");
    s->add_option("--ell", ell, "moment order of the truncated law (needs --k)");
    s->callback([&] {
      action = [&] {
        const auto g = game(alpha, p);
        const auto grid_x = grid(xs, x_dyadic);
        if (ell != 0 && k == 0) throw invalid_argument("k", "--ell needs --k");
        Sink sink(common.out);
        auto& os = sink.os();
        os << "x,cdf,tail,psi" << (k ? ",truncated_cdf" : "") << (ell ? ",truncated_moment" : "") << "\n";
        for (double x : grid_x) {
          os << num(x) << "," << num(dist::cdf(x, g)) << "," << num(dist::tail(x, g)) << ","
             << (x > 0 ? num(dist::psi(x)) : "nan");
          if (k) os << "," << num(dist::truncated_cdf(x, k));
          if (ell) os << "," << num(dist::truncated_moment(ell, k));
          os << "\n";
        }
        sink.commit();
      };
    });
  }
  // quantile
  {
    auto* s = app.add_subcommand("quantile", "generalized inverse of the payoff CDF");
    s->add_option("--s", ss, "levels in [0, 1)")->required();
    add_game(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto g = game(alpha, p);
        Sink sink(common.out);
        sink.os() << "s,quantile\n";
        for (double v : ss) sink.os() << num(v) << "," << num(dist::quantile(v, g)) << "\n";
        sink.commit();
      };
    });
  }
  // exact-tail
  {
    auto* s = app.add_subcommand("exact-tail", "exact P{S_n > x}");
    s->add_option("--n", n, "number of summands")->required();
    add_x(s), add_out(s, true);
    s->add_option("--cap", cap, "exact-engine cap");
    s->callback([&] {
      action = [&] {
        const auto grid_x = int_grid(grid(xs, x_dyadic));
        exact::Limits lim;
        lim.cap = cap;
        const std::uint64_t top = *std::max_element(grid_x.begin(), grid_x.end());
        if (top > cap) throw invalid_argument("x", "exceeds --cap " + std::to_string(cap));
        const auto table = exact::sum_table(n, top, lim);
        Sink sink(common.out);
        if (common.format == "json" || grid_x.size() == 1) {
          if (grid_x.size() == 1) {
            sink.os() << table.tail(static_cast<std::int64_t>(grid_x[0])).to_json() << "\n";
          } else {
            json a = json::array();
            for (auto x : grid_x)
              a.push_back({{"x", x}, {"tail", json::parse(table.tail(static_cast<std::int64_t>(x)).to_json())}});
            sink.os() << a.dump() << "\n";
          }
        } else {
          sink.os() << "x,num,log2_den,decimal\n";
          for (auto x : grid_x) {
            const auto t = table.tail(static_cast<std::int64_t>(x)).canonical();
            sink.os() << x << "," << t.numerator().str() << "," << t.log2_denominator() << ","
                      << t.to_decimal_string() << "\n";
          }
        }
        sink.commit();
      };
    });
  }
  // trimmed-tail
  {
    auto* s = app.add_subcommand("trimmed-tail", "exact P{S_{n,r} > x}; --oracle enumerates instead");
    s->add_option("--n", n, "number of summands")->required();
    s->add_option("--r", r, "number of largest terms removed");
    s->add_option("--x", xs, "threshold")->required()->expected(1);
    s->add_flag("--oracle", oracle, "exhaustive enumeration (n <= 5)");
    add_game(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto g = game(alpha, p);
        Sink sink(common.out);
        if (!g.is_classical()) {
          sink.os() << json({{"n", n}, {"r", r}, {"x", xs[0]}, {"tail", static_cast<double>(exact::enum_oracle(n, r, xs[0], g))},
                             {"backend", "enum"}}).dump() << "\n";
        } else {
          const auto x = int_grid({xs[0]})[0];
          const auto t = oracle ? exact::enum_oracle(n, r, x) : exact::trimmed_tail_exact(n, r, x);
          sink.os() << t.to_json() << "\n";
        }
        sink.commit();
      };
    });
  }
  // conv-ratio
  {
    auto* s = app.add_subcommand("conv-ratio", "P{X1+X2 > x}/P{X > x}; --k --l for the closed form");
    add_x(s), add_out(s, false);
    s->add_option("--k", k, "closed form: smaller level");
    s->add_option("--l", l, "closed form: larger level");
    s->callback([&] {
      action = [&] {
        Sink sink(common.out);
        if (k != 0 || l != 0) {
          sink.os() << exact::two_sum_tail_closed(k, l).to_json() << "\n";
        } else {
          const auto grid_x = int_grid(grid(xs, x_dyadic));
          sink.os() << "x,two_sum_tail,single_tail,ratio\n";
          for (const auto& pt : exact::conv_ratio_curve(grid_x))
            sink.os() << pt.x << "," << pt.two_sum_tail.to_decimal_string() << ","
                      << pt.single_tail.to_decimal_string() << "," << num(pt.ratio) << "\n";
        }
        sink.commit();
      };
    });
  }
  // asym-tail
  {
    auto* s = app.add_subcommand("asym-tail", "exact vs asymptotic P{S_{n,r} > x}");
    s->add_option("--n", n, "number of summands")->required();
    s->add_option("--r", r, "number of largest terms removed");
    add_x(s), add_out(s, false);
    s->add_option("--reps", reps, "Monte Carlo replicates for inner probabilities beyond the cap");
    s->add_option("--seed", seed, "seed for inner Monte Carlo");
    s->callback([&] {
      action = [&] {
        asym::Options opt;
        if (reps) opt.mc_reps = reps;
        if (seed) opt.seed = seed;
        const auto grid_x = grid(xs, x_dyadic);
        Sink sink(common.out);
        sink.os() << "x,frac_log2,exact,asymptote,ratio,backend\n";
        for (double x : grid_x) {
          const auto a = asym::snr_tail_rhs(n, r, x, opt);
          long double ex = NAN;
          if (x == std::floor(x) && x <= static_cast<double>(opt.limits.cap))
            ex = exact::trimmed_tail_exact(n, r, static_cast<std::uint64_t>(x)).to_long_double();
          sink.os() << num(x) << "," << num(dist::frac_log2(x)) << "," << num(ex) << "," << num(a.value) << ","
                    << num(ex / a.value) << "," << asym::to_string(a.inner.backend) << "\n";
        }
        sink.commit();
      };
    });
  }
  // finer-as
  {
    auto* s = app.add_subcommand("finer-as", "P{S_{n,r} > 2^m + c} approximation");
    s->add_option("--n", n)->required();
    s->add_option("--r", r);
    s->add_option("--m", m)->required();
    s->add_option("--c", c)->required();
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto a = asym::finer_as_rhs(n, r, m, c);
        json o{{"n", n}, {"r", r}, {"m", m}, {"c", c}, {"value", static_cast<double>(a.value)},
               {"leading", static_cast<double>(a.leading)}, {"correction", static_cast<double>(a.correction)},
               {"inner", static_cast<double>(a.inner.value)}, {"backend", asym::to_string(a.inner.backend)}};
        const double x = std::ldexp(1.0, m) + c;
        if (x <= static_cast<double>(exact::kDefaultCap))
          o["exact"] = exact::trimmed_tail_exact(n, r, static_cast<std::uint64_t>(x)).to_double();
        Sink sink(common.out);
        sink.os() << o.dump() << "\n";
        sink.commit();
      };
    });
  }
  // subexp-limits
  {
    auto* s = app.add_subcommand("subexp-limits", "liminf and limsup of the two-fold tail ratio");
    add_game(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto [a, b] = asym::subexp_limits(game(alpha, p));
        Sink sink(common.out);
        sink.os() << json({{"alpha", alpha}, {"p", p}, {"liminf", a}, {"limsup", b}}).dump() << "\n";
        sink.commit();
      };
    });
  }
  // gen-tail
  {
    auto* s = app.add_subcommand("gen-tail", "generalized-game tail asymptote");
    s->add_option("--n", n)->required();
    s->add_option("--r", r);
    s->add_option("--x", xs)->required()->expected(1);
    add_game(s), add_out(s, false);
    s->add_option("--reps", reps, "Monte Carlo replicates when enumeration is too large");
    s->add_option("--seed", seed, "seed for inner Monte Carlo");
    s->callback([&] {
      action = [&] {
        asym::Options opt;
        if (reps) opt.mc_reps = reps;
        if (seed) opt.seed = seed;
        const auto g = game(alpha, p);
        const auto a = asym::gen_snr_tail_rhs(n, r, xs[0], g, opt);
        json o{{"n", n}, {"r", r}, {"x", xs[0]}, {"alpha", alpha}, {"p", p},
               {"asymptote", static_cast<double>(a.value)}, {"backend", asym::to_string(a.inner.backend)}};
        if (n <= exact::kMaxEnumN) {
          const auto e = exact::enum_oracle(n, r, xs[0], g);
          o["enum"] = static_cast<double>(e);
          o["ratio"] = static_cast<double>(a.value / e);
        }
        Sink sink(common.out);
        sink.os() << o.dump() << "\n";
        sink.commit();
      };
    });
  }
  // limit-cdf
  {
    auto* s = app.add_subcommand("limit-cdf", "G_gamma or G_{j,gamma} by CF inversion; CF values; weights");
    s->add_option("--gamma", gamma, "positional parameter")->required();
    s->add_option("--j", j, "level: use W_{j,gamma} instead of W_gamma")->each([&](const std::string&) { has_j = true; });
    s->add_option("--what", what, "cdf, cf, logf or weights")->check(CLI::IsMember({"cdf", "cf", "logf", "weights"}));
    s->add_option("--x", xs, "points for cdf");
    s->add_option("--lo", lo), s->add_option("--hi", hi), s->add_option("--dx", dx);
    s->add_option("--t", ts, "points for cf / logf");
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        Sink sink(common.out);
        auto& os = sink.os();
        if (what == "weights") {
          os << "j,p_weight,r1,r2,r3\n";
          for (int jj = jmin - 3; jj <= jmax + 3; ++jj)
            os << jj << "," << num(limit::p_weight(jj, gamma)) << "," << num(limit::r_weight(jj, gamma, 1)) << ","
               << num(limit::r_weight(jj, gamma, 2)) << "," << num(limit::r_weight(jj, gamma, 3)) << "\n";
        } else if (what == "cf" || what == "logf") {
          if (ts.empty()) throw invalid_argument("t", "give --t values");
          os << "t,re,im\n";
          for (double t : ts) {
            cf::cplx v;
            if (what == "logf")
              v = limit::log_cf_f(limit::SemistableParams{gamma, j}.eta(), t);
            else
              v = has_j ? limit::cf_Wjgamma(j, gamma, t) : limit::cf_Wgamma(gamma, t);
            os << num(t) << "," << num(v.real()) << "," << num(v.imag()) << "\n";
          }
        } else {
          cf::CharFn phi;
          if (has_j) {
            const double eta = limit::SemistableParams{gamma, j}.eta();
            phi = [eta](double t) { return limit::cf_eta(eta, t); };
          } else {
            limit::SemistableParams{gamma, 0};
            phi = [g = gamma](double t) { return limit::cf_Wgamma(g, t); };
          }
          os << "x,value,error_estimate,backend\n";
          if (!xs.empty()) {
            double amax = 0;
            for (double x : xs) amax = std::max(amax, std::abs(x));
            cf::Inverter inv(phi, amax);
            for (double x : xs) {
              const auto pt = inv.at(x);
              os << num(x) << "," << num(pt.cdf) << "," << num(pt.error) << ",gil-pelaez\n";
            }
          } else {
            if (!(hi > lo) || !(dx > 0)) throw invalid_argument("dx", "need --lo < --hi and --dx > 0");
            cf::Inverter inv(phi, std::max(std::abs(lo), std::abs(hi)));
            const auto count = static_cast<std::size_t>(std::floor((hi - lo) / dx + 1e-9)) + 1;
            const auto curve = inv.grid(lo, dx, count);
            for (std::size_t i = 0; i < curve.size(); ++i)
              os << num(curve.x_at(i)) << "," << num(curve.cdf[i]) << "," << num(curve.error[i]) << ",gil-pelaez\n";
          }
        }
        sink.commit();
      };
    });
  }
  // gstar-cdf
  {
    auto* s = app.add_subcommand("gstar-cdf", "merged limit of the max-trimmed sum");
    s->add_option("--gamma", gamma)->required();
    s->add_option("--x", xs, "points");
    s->add_option("--lo", lo), s->add_option("--hi", hi), s->add_option("--dx", dx);
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const limit::SemistableTables tab(gamma);
        std::vector<double> pts = xs;
        if (pts.empty()) {
          if (!(hi > lo) || !(dx > 0)) throw invalid_argument("dx", "need --lo < --hi and --dx > 0");
          for (double x = lo; x <= hi + 1e-9; x += dx) pts.push_back(x);
        }
        const double err = tab.gstar_curve().max_error() + 1e-10;
        Sink sink(common.out);
        sink.os() << "x,value,error_estimate,backend\n";
        for (double x : pts) sink.os() << num(x) << "," << num(tab.gstar(x)) << "," << num(err) << ",series\n";
        sink.commit();
      };
    });
  }
  // sample-y
  {
    auto* s = app.add_subcommand("sample-y", "draws of the trimmed limit Y_{r,gamma}");
    s->add_option("--r", r);
    s->add_option("--gamma", gamma)->required();
    s->add_option("--truncation", truncation, "number of arrivals N");
    s->add_flag("--naive", naive, "walk all N arrivals explicitly");
    add_seed(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        limit::YSamplerOptions opt;
        opt.truncation = truncation;
        opt.threads = common.threads;
        opt.naive = naive;
        const auto v = limit::sample_Y(r, gamma, reps, seed, opt);
        Sink sink(common.out);
        sink.os() << header({{"r", std::to_string(r)}, {"gamma", num(gamma)}, {"N", std::to_string(truncation)},
                             {"reps", std::to_string(reps)}, {"seed", std::to_string(seed)}});
        sink.os() << "y\n";
        for (double y : v) sink.os() << num(y) << "\n";
        sink.commit();
      };
    });
  }
  // y-tail
  {
    auto* s = app.add_subcommand("y-tail", "Monte Carlo tail of Y_{r,gamma} against its asymptote");
    s->add_option("--r", r);
    s->add_option("--gamma", gamma)->required();
    s->add_option("--truncation", truncation, "number of arrivals N");
    add_x(s), add_seed(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto grid_x = grid(xs, x_dyadic);
        limit::YSamplerOptions opt;
        opt.truncation = truncation;
        opt.threads = common.threads;
        const mc::EmpiricalTail yr(limit::sample_Y(r, gamma, reps, seed, opt));
        const mc::EmpiricalTail y0 = r == 0 ? yr : mc::EmpiricalTail(limit::sample_Y(0, gamma, reps, seed + 1, opt));
        Sink sink(common.out);
        sink.os() << header({{"r", std::to_string(r)}, {"gamma", num(gamma)}, {"N", std::to_string(truncation)},
                             {"reps", std::to_string(reps)}, {"seed", std::to_string(seed)}});
        sink.os() << "x,mc_tail,ci_halfwidth,asymptote,ratio\n";
        for (double x : grid_x) {
          const auto a = limit::y_tail_rhs(r, gamma, x, [&](double z) { return y0.tail(z); });
          sink.os() << num(x) << "," << num(yr.tail(x)) << "," << num(yr.ci_halfwidth(x)) << "," << num(a.value)
                    << "," << num(yr.tail(x) / a.value) << "\n";
        }
        sink.commit();
      };
    });
  }
  // centering
  {
    auto* s = app.add_subcommand("centering", "centering a_{n,gamma}^{(r)}, closed form, A_{r,gamma}, gamma_n");
    s->add_option("--n", nn)->required();
    s->add_option("--r", r);
    s->add_option("--gamma", gamma, "defaults to gamma_n");
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const double g = gamma > 0 ? gamma : dist::gamma_n(nn);
        json o{{"n", nn}, {"r", r}, {"gamma", g}, {"gamma_n", dist::gamma_n(nn)},
               {"centering", limit::centering(nn, g, r)}, {"a_const", limit::a_const(r, g)}};
        if (g <= 1) o["centering_closed_r0"] = limit::centering_closed(nn, g);
        Sink sink(common.out);
        sink.os() << o.dump() << "\n";
        sink.commit();
      };
    });
  }
  // xi
  {
    auto* s = app.add_subcommand("xi", "xi(gamma) and f(gamma)");
    s->add_option("--gamma", gamma)->required();
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto v = limit::xi_and_f(gamma);
        Sink sink(common.out);
        sink.os() << json({{"gamma", gamma}, {"xi", v.xi}, {"f", v.f}}).dump() << "\n";
        sink.commit();
      };
    });
  }
  // chernoff
  {
    auto* s = app.add_subcommand("chernoff", "h(x) and the bound e^{-h(x)/eta}");
    add_x(s), add_out(s, false);
    s->add_option("--n", nn, "sample size (with --j gives the bound)");
    s->add_option("--j", j, "level offset");
    s->add_option("--gamma", gamma, "defaults to gamma_n");
    s->callback([&] {
      action = [&] {
        const auto grid_x = grid(xs, x_dyadic);
        Sink sink(common.out);
        sink.os() << "x,h" << (nn ? ",bound" : "") << "\n";
        for (double x : grid_x) {
          sink.os() << num(x) << "," << num(limit::chernoff_h(x));
          if (nn) sink.os() << "," << num(limit::chernoff_bound(nn, j, gamma > 0 ? gamma : dist::gamma_n(nn), x));
          sink.os() << "\n";
        }
        sink.commit();
      };
    });
  }
  // mc-sim
  {
    auto* s = app.add_subcommand("mc-sim", "Monte Carlo tail of S_{n,r}; raw payoffs; uniform bound calibration");
    s->add_option("--n", nn, "number of summands");
    s->add_option("--r", r);
    s->add_option("--norm", norm, "raw, centered or log")->check(CLI::IsMember({"raw", "centered", "log"}));
    s->add_option("--draws", draws, "emit this many single payoffs instead");
    s->add_option("--delta", delta, "with --norm centered: report the uniform bound and calibrated C");
    add_x(s), add_game(s), add_out(s, false);
    s->add_option("--seed", seed, "master seed")->required();
    s->add_option("--reps", reps, "replicates");
    add_threads(s);
    s->callback([&] {
      action = [&] {
        const auto g = game(alpha, p);
        Sink sink(common.out);
        auto& os = sink.os();
        if (draws) {
          os << header({{"draws", std::to_string(draws)}, {"seed", std::to_string(seed)}, {"alpha", num(alpha)}, {"p", num(p)}});
          os << "payoff\n";
          for (double v : dist::sample(g, draws, seed)) os << num(v) << "\n";
          sink.commit();
          return;
        }
        if (reps == 0) throw invalid_argument("reps", "required unless --draws is given");
        if (nn == 0) throw invalid_argument("n", "required unless --draws is given");
        const auto nm = norm == "raw" ? mc::Normalization::raw
                                      : norm == "centered" ? mc::Normalization::centered : mc::Normalization::log_shifted;
        const auto et = mc::simulate_trimmed({nn, r, reps, seed, common.threads}, g, nm);
        std::vector<double> grid_x;
        if (xs.empty() && x_dyadic.empty()) {
          for (int e = 1; e <= 14; ++e) grid_x.push_back(std::ldexp(1.0, e));
        } else {
          grid_x = grid(xs, x_dyadic);
        }
        os << header({{"n", std::to_string(nn)}, {"r", std::to_string(r)}, {"reps", std::to_string(reps)},
                      {"seed", std::to_string(seed)}, {"alpha", num(alpha)}, {"p", num(p)}, {"norm", norm}});
        const bool bound = delta > 0 && nm == mc::Normalization::centered;
        double C = 0;
        std::vector<double> bx, bt;
        if (bound) {
          for (double x : grid_x)
            if (x >= M_E) bx.push_back(x), bt.push_back(et.tail(x));
          C = asym::calibrate_uniform_C(r, delta, bx, bt);
          os << "# calibrated_C=" << num(C) << "\n";
        }
        os << "x,tail,ci_halfwidth" << (bound ? ",uniform_bound" : "") << "\n";
        for (double x : grid_x) {
          os << num(x) << "," << num(et.tail(x)) << "," << num(et.ci_halfwidth(x));
          if (bound) os << "," << (x >= M_E ? num(asym::uniform_bound_rhs(r, x, delta, C)) : "nan");
          os << "\n";
        }
        sink.commit();
      };
    });
  }
  // merge-check / trimmed-merge-check
  for (const bool trimmed : {false, true}) {
    auto* s = app.add_subcommand(trimmed ? "trimmed-merge-check" : "merge-check",
                                 trimmed ? "KS distance of (S_n - X_n*)/n - log2 n from G*_{gamma_n}"
                                         : "KS distance of S_n/n - log2 n from G_{gamma_n}");
    s->add_option("--n", nn)->required();
    add_seed(s), add_out(s, false);
    s->callback([&, trimmed] {
      action = [&, trimmed] {
        const auto rep = trimmed ? mc::trimmed_merge_check(nn, reps, seed, common.threads)
                                 : mc::merge_check(nn, reps, seed, common.threads);
        Sink sink(common.out);
        sink.os() << json({{"n", rep.n}, {"gamma", rep.gamma}, {"reps", rep.reps}, {"seed", seed}, {"ks", rep.ks},
                           {"inversion_error", rep.inversion_error}, {"grid_tail", rep.grid_tail}})
                         .dump()
                  << "\n";
        sink.commit();
      };
    });
  }
  // max-check
  {
    auto* s = app.add_subcommand("max-check", "law of the maximum against p_{j,gamma_n}");
    s->add_option("--n", nn)->required();
    s->add_option("--jmin", jmin), s->add_option("--jmax", jmax);
    add_seed(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto rows = mc::max_pmf_check(nn, reps, seed, jmin, jmax, common.threads);
        Sink sink(common.out);
        sink.os() << header({{"n", std::to_string(nn)}, {"reps", std::to_string(reps)}, {"seed", std::to_string(seed)}});
        sink.os() << "j,empirical,p_weight,deviation,sigma\n";
        for (const auto& row : rows)
          sink.os() << row.j << "," << num(row.empirical) << "," << num(row.p_weight) << "," << num(row.deviation) << ","
                    << num(row.sigma) << "\n";
        sink.commit();
      };
    });
  }
  // chernoff-check
  {
    auto* s = app.add_subcommand("chernoff-check", "empirical truncated-sum tails against the Chernoff bound");
    s->add_option("--n", nn)->required();
    s->add_option("--j", j);
    add_x(s), add_seed(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto grid_x = grid(xs, x_dyadic);
        const auto rows = mc::chernoff_check(nn, j, grid_x, reps, seed, common.threads);
        int viol = 0;
        Sink sink(common.out);
        sink.os() << header({{"n", std::to_string(nn)}, {"j", std::to_string(j)}, {"reps", std::to_string(reps)},
                             {"seed", std::to_string(seed)}});
        sink.os() << "x,empirical,bound,ci_halfwidth,violated\n";
        for (const auto& row : rows) {
          viol += row.violated;
          sink.os() << num(row.x) << "," << num(row.empirical) << "," << num(row.bound) << "," << num(row.ci) << ","
                    << (row.violated ? 1 : 0) << "\n";
        }
        sink.os() << "# violations=" << viol << "\n";
        sink.commit();
      };
    });
  }
  // fig1
  {
    auto* s = app.add_subcommand("fig1", "histograms of log2 S_n and log2 (S_n - X_n*)");
    s->add_option("--n", nn)->default_val(128);
    s->add_option("--bin", bin, "bin width on the log2 scale");
    add_seed(s), add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto d = mc::histogram_fig1(nn, reps, seed, bin, common.threads);
        Sink sink(common.out);
        sink.os() << header({{"n", std::to_string(nn)}, {"reps", std::to_string(reps)}, {"seed", std::to_string(seed)},
                             {"side_lobe_threshold", num(d.side_lobe_threshold)},
                             {"side_lobe_ratio", num(d.side_lobe_ratio)}});
        sink.os() << "series,bin_left,bin_right,count\n";
        for (const auto* h : {&d.sum, &d.trimmed})
          for (std::size_t i = 0; i < h->counts.size(); ++i)
            sink.os() << (h == &d.sum ? "sum" : "trimmed") << "," << num(h->bin_left(i)) << ","
                      << num(h->bin_left(i + 1)) << "," << h->counts[i] << "\n";
        sink.commit();
      };
    });
  }
  // fig2
  {
    auto* s = app.add_subcommand("fig2", "exact x P{S_n > x}");
    s->add_option("--n", n)->default_val(16);
    s->add_option("--xmax", xmax, "largest x");
    s->add_option("--ppo", ppo, "grid points per octave");
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto grid_x = mc::fig2_grid(xmax, ppo);
        const auto curve = mc::oscillation_curve_fig2(n, grid_x);
        Sink sink(common.out);
        sink.os() << "x,value\n";
        for (const auto& pt : curve) sink.os() << pt.x << "," << num(pt.value) << "\n";
        sink.commit();
      };
    });
  }
  // repro-all
  {
    auto* s = app.add_subcommand("repro-all", "run every acceptance check and write a report");
    s->add_option("--config", config, "key = value file");
    s->add_option("--scratch", scratch, "directory for temporary files (default: system temp)");
    add_out(s, false);
    s->callback([&] {
      action = [&] {
        const auto cfg = fixtures::load_file(config);
        const std::string dir = scratch.empty() ? std::filesystem::temp_directory_path().string() : scratch;
        const auto results = acceptance::run_all(
            cfg,
            [](const std::vector<std::string>& args) {
              std::vector<const char*> av{"stpete"};
              for (const auto& a : args) av.push_back(a.c_str());
              return run(static_cast<int>(av.size()), av.data());
            },
            dir);
        int failed = 0;
        Sink sink(common.out);
        sink.os() << "# config\n";
        std::istringstream cs(fixtures::to_text(cfg));
        for (std::string line; std::getline(cs, line);) sink.os() << "#   " << line << "\n";
        for (const auto& res : results) {
          failed += !res.pass;
          sink.os() << acceptance::format_line(res) << "\n";
        }
        sink.os() << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed") << "\n";
        sink.commit();
        if (failed) throw std::runtime_error("repro-all: " + std::to_string(failed) + " check(s) failed");
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (action) action();
    return 0;
  } catch (const invalid_argument& e) {
    std::cerr << "error: --" << e.parameter() << ": " << e.what() << "\n";
    return 2;
  } catch (const capacity_error& e) {
    std::cerr << "error: --x: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    std::cerr << "error: did not converge: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> av{"stpete"};
  for (const auto& a : args) av.push_back(a.c_str());
  return run(static_cast<int>(av.size()), av.data());
}

}  // namespace stpete::cli
