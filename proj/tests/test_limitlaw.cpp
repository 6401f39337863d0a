#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stpete/cf_inversion.hpp"
#include "stpete/limitlaw.hpp"
#include "stpete/montecarlo.hpp"

namespace lim = stpete::limit;
namespace cf = stpete::cf;

TEST(Weights, Values) {
  EXPECT_NEAR(lim::p_weight(0, 1), std::exp(-1) * (1 - std::exp(-1)), 1e-15);
  EXPECT_NEAR(lim::r_weight(0, 1, 1), 1 / (M_E - 1), 1e-15);
  EXPECT_LT(lim::p_weight(60, 1), 1e-15);
  EXPECT_LT(lim::p_weight(-10, 1), 1e-15);
  double sp = 0;
  for (int j = -10; j <= 60; ++j) sp += lim::p_weight(j, 0.7);
  EXPECT_NEAR(sp, 1, 1e-12);
  double sr = 0;
  for (int m = 1; m <= 60; ++m) sr += lim::r_weight(1, 0.7, m);
  EXPECT_NEAR(sr, 1, 1e-12);
}

TEST(LogCf, ZeroAndBackends) {
  EXPECT_EQ(lim::log_cf_f(1, 0), cf::cplx(0, 0));
  const auto a = lim::log_cf_f(1, 3, lim::LogCfBackend::atoms);
  const auto b = lim::log_cf_f(1, 3, lim::LogCfBackend::taylor);
  EXPECT_LT(std::abs(a - b), 1e-10);
}

TEST(LogCf, SecondCumulant) {
  const double eta = 0.8, h = 1e-3;
  const double d2 = (lim::log_cf_f(eta, h).real() * 2) / (h * h);
  EXPECT_NEAR(-d2, 2 * eta, 1e-5);
}

TEST(CfW, BasicProperties) {
  EXPECT_LT(std::abs(lim::cf_Wjgamma(1, 0.8, 0) - cf::cplx(1, 0)), 1e-15);
  EXPECT_LT(std::abs(lim::cf_Wgamma(0.8, 0) - cf::cplx(1, 0)), 1e-15);
  for (double t : {0.1, 1.0, 7.0}) {
    EXPECT_LE(std::abs(lim::cf_Wjgamma(2, 0.6, t)), 1 + 1e-15);
    EXPECT_LT(std::abs(lim::cf_Wgamma(0.6, t)), 1);
  }
  // mean: derivative at 0 equals i log2 eta
  const double eta = 4 / 0.6, h = 1e-5;
  const auto d = (lim::cf_Wjgamma(2, 0.6, h) - lim::cf_Wjgamma(2, 0.6, -h)) / (2 * h);
  EXPECT_NEAR(d.imag(), std::log2(eta), 1e-6);
}

TEST(CfW, Scaling) {
  const double eta = 3.5;
  for (double t : {0.2, 1.0, 2.5}) {
    const auto lhs = lim::log_cf_f(eta, t / eta);
    const auto rhs = lim::log_cf_f(1, t) / eta;
    EXPECT_LT(std::abs(lhs - rhs), 1e-11);
  }
}

TEST(Inversion, Normal) {
  const auto p = cf::cdf_from_cf([](double t) { return cf::cplx(std::exp(-t * t / 2), 0); }, 0);
  EXPECT_NEAR(p.cdf, 0.5, 1e-10);
  const auto q = cf::cdf_from_cf([](double t) { return cf::cplx(std::exp(-t * t / 2), 0); }, 1);
  EXPECT_NEAR(q.cdf, 0.5 * std::erfc(-1 / std::sqrt(2.0)), 1e-9);
}

TEST(Inversion, Moments) {
  for (double eta : {0.5, 1.0, 2.0}) {
    const auto m = lim::inverted_moments(eta);
    EXPECT_NEAR(m.mean, std::log2(eta), 1e-6);
    EXPECT_NEAR(m.variance, 2 * eta, 1e-6);
  }
}

TEST(Inversion, MonotoneGrid) {
  const auto c = lim::gamma_curve(0.75);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c.cdf[i], c.cdf[i - 1] - 1e-8);
  // the far left carries no mass; what remains is inversion error
  EXPECT_LE(c(-12), c.max_error());
  EXPECT_GT(c(200), 1 - 1e-2);
}

TEST(Gstar, Limits) {
  const lim::SemistableTables t(0.9);
  EXPECT_LT(t.gstar(-11), 1e-10);
  EXPECT_GT(t.gstar(190), 0.99);
  EXPECT_LT(t.gstar(0), t.gstar(3));
}

TEST(Gstar, MixtureSampler) {
  const lim::SemistableTables t(0.8);
  stpete::Xoshiro256 eng(5);
  std::vector<double> v(200'000);
  for (auto& x : v) x = t.draw(eng, 0);
  const stpete::mc::EmpiricalTail e(std::move(v));
  EXPECT_LT(stpete::mc::ks_distance(e, [&](double x) { return t.gstar(x); }), 0.006);
}

TEST(Centering, Values) {
  EXPECT_DOUBLE_EQ(lim::a_const(0, 1), 0);
  EXPECT_DOUBLE_EQ(lim::a_const(1, 1), 1);
  EXPECT_DOUBLE_EQ(lim::a_const(3, 1), 2);
  EXPECT_NEAR(lim::centering(8, 1, 0), 3.125, 1e-14);
}

TEST(Centering, ClosedFormAgrees) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint64_t> nd(1, 10'000);
  std::uniform_real_distribution<double> gd(0.5, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto n = nd(rng);
    double g = gd(rng);
    if (g <= 0.5) g = 1;
    EXPECT_NEAR(lim::centering(n, g), lim::centering_closed(n, g), 1e-12) << n << " " << g;
    const double mn = std::floor(std::log2((n + 1) / g));
    EXPECT_LT(lim::centering(n, g) - mn, 4);
  }
}

TEST(Xi, Values) {
  const auto one = lim::xi_and_f(1);
  EXPECT_NEAR(one.xi, 0, 1e-15);
  EXPECT_NEAR(one.f, 0, 1e-15);
  EXPECT_NEAR(lim::xi_and_f(0.75).f, 1.0 / 3, 1e-15);
}

TEST(Xi, Identity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gd(0.5, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double g = std::max(gd(rng), 0.5000001);
    const auto v = lim::xi_and_f(g);
    EXPECT_NEAR(v.f, v.xi + std::log2(g) - 1 + 1 / g, 1e-10) << g;
  }
}

TEST(Chernoff, Values) {
  EXPECT_EQ(lim::chernoff_h(0), 0);
  EXPECT_EQ(lim::chernoff_bound(64, 0, 0.0), 1);
  EXPECT_NEAR(lim::chernoff_h(2), 4 * std::log(2.0) - 2, 1e-15);
  for (double x = 0; x <= 50; x += 0.25) {
    EXPECT_LE(x * x / (4 + x), lim::chernoff_h(x) + 1e-15);
    EXPECT_LE(lim::chernoff_h(x), x * x / 2 + 1e-15);
  }
  EXPECT_THROW(lim::chernoff_h(-1), stpete::invalid_argument);
}

TEST(SampleY, Deterministic) {
  lim::YSamplerOptions a, b;
  a.threads = 1, b.threads = 3;
  EXPECT_EQ(lim::sample_Y(1, 0.75, 2000, 9, a), lim::sample_Y(1, 0.75, 2000, 9, b));
  EXPECT_THROW(lim::sample_Y(3, 1, 10, 1, {3, 1, false}), stpete::invalid_argument);
}

TEST(SampleY, FastMatchesNaive) {
  lim::YSamplerOptions fast, naive;
  fast.truncation = naive.truncation = 2000;
  naive.naive = true;
  const stpete::mc::EmpiricalTail a(lim::sample_Y(1, 0.8, 20'000, 1, fast));
  const auto b = lim::sample_Y(1, 0.8, 20'000, 2, naive);
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sb.begin(), sb.end());
  double ks = 0;
  for (std::size_t i = 0; i < sb.size(); ++i) {
    const double f = a.cdf(sb[i]);
    ks = std::max({ks, std::abs(f - (i + 1.0) / sb.size()), std::abs(f - static_cast<double>(i) / sb.size())});
  }
  EXPECT_LT(ks, 0.02);
}

TEST(SampleY, MeanStableInTruncation) {
  lim::YSamplerOptions o1, o2;
  o1.truncation = 10'000, o2.truncation = 20'000;
  const auto a = lim::sample_Y(1, 1, 20'000, 4, o1), b = lim::sample_Y(1, 1, 20'000, 5, o2);
  auto stats = [](const std::vector<double>& v) {
    double s = 0, s2 = 0;
    for (double x : v) s += x, s2 += x * x;
    const double m = s / v.size();
    return std::pair{m, (s2 / v.size() - m * m) / v.size()};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  EXPECT_LT(std::abs(ma - mb), 3 * std::sqrt(va + vb));
}

TEST(SampleY, W1MatchesY01) {
  // W_1 = Y_{0,1} + the centering limit of a_{n,1} - log2 n along n = 2^k.
  const stpete::mc::EmpiricalTail y(lim::sample_Y(0, 1, 50'000, 8, {1 << 16, 0, false}));
  const auto c = lim::gamma_curve(1);
  const double shift = lim::centering(1 << 16, 1) - 16;
  EXPECT_LT(stpete::mc::ks_distance(y, [&](double x) { return c(x + shift); }), 0.05);
}

TEST(YTail, SumAtPowerOfTwoPlusConstant) {
  // r = 0, gamma = 1, x = 2^m + c: value -> 2^-m (1 + P{Y_0 > c}).
  const stpete::mc::EmpiricalTail y(lim::sample_Y(0, 1, 20'000, 3));
  const auto inner = [&](double z) { return y.tail(z); };
  const int m = 20;
  const double c = 1.7;
  const auto a = lim::y_tail_rhs(0, 1, std::ldexp(1.0, m) + c, inner);
  EXPECT_NEAR(a.value * std::ldexp(1.0, m), 1 + y.tail(c), 1e-3);
}
