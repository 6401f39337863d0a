#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "stpete/game.hpp"
#include "stpete/rng.hpp"

namespace d = stpete::dist;

TEST(Cdf, Classical) {
  EXPECT_EQ(d::cdf(2), 0.5L);
  EXPECT_EQ(d::cdf(3), 0.5L);
  EXPECT_EQ(d::cdf(4), 0.75L);
  EXPECT_EQ(d::cdf(1.9), 0.0L);
}

TEST(Tail, Classical) {
  EXPECT_EQ(d::tail(5), 0.25L);
  for (int m = 1; m < 40; ++m) EXPECT_EQ(d::tail(std::ldexp(1.0, m)), std::ldexp(1.0L, -m));
}

TEST(Tail, GeneralizedPmfSum) {
  const d::GameParams g(1.0, 1.0 / 3);
  // P{X > 6} by direct pmf summation over payoffs 1.5^k.
  long double direct = 0;
  for (int k = 1; k < 200; ++k)
    if (std::pow(1.5L, k) > 6) direct += (1.0L / 3) * std::pow(2.0L / 3, k - 1);
  EXPECT_NEAR(static_cast<double>(d::tail(6, g)), static_cast<double>(direct), 1e-15);
  EXPECT_NEAR(static_cast<double>(d::tail(6, g)), 16.0 / 81, 1e-15);
}

TEST(Quantile, Classical) {
  EXPECT_EQ(d::quantile(0), 2);
  EXPECT_EQ(d::quantile(0.5), 2);
  EXPECT_EQ(d::quantile(0.75), 4);
  EXPECT_THROW(d::quantile(1.0), stpete::invalid_argument);
}

TEST(Psi, Values) {
  EXPECT_DOUBLE_EQ(d::psi(4), 1);
  EXPECT_DOUBLE_EQ(d::psi(3), 1.5);
  EXPECT_DOUBLE_EQ(d::psi(0.75), 1.5);
}

TEST(GammaN, Values) {
  EXPECT_DOUBLE_EQ(d::gamma_n(3), 0.75);
  EXPECT_DOUBLE_EQ(d::gamma_n(4), 1);
  EXPECT_DOUBLE_EQ(d::gamma_n(1), 1);
}

TEST(Truncated, CdfAndMoments) {
  EXPECT_DOUBLE_EQ(d::truncated_cdf(2, 2), 2.0 / 3);
  EXPECT_DOUBLE_EQ(d::truncated_cdf(4, 2), 1);
  EXPECT_DOUBLE_EQ(d::truncated_cdf(2, 1), 1);
  EXPECT_NEAR(static_cast<double>(d::truncated_moment(1, 1)), 2, 1e-15);
  EXPECT_NEAR(static_cast<double>(d::truncated_moment(2, 2)), 8, 1e-14);
  EXPECT_NEAR(static_cast<double>(d::truncated_moment(1, 10)), 10 / (1 - std::ldexp(1.0, -10)), 1e-12);
}

TEST(Sample, FrequencyOfTwo) {
  const auto v = d::sample(d::GameParams::classical(), 1'000'000, 7);
  const double f = std::count(v.begin(), v.end(), 2.0) / 1e6;
  EXPECT_NEAR(f, 0.5, 0.0015);
}

TEST(Sample, Deterministic) {
  EXPECT_EQ(d::sample(d::GameParams::classical(), 1000, 42), d::sample(d::GameParams::classical(), 1000, 42));
  EXPECT_NE(d::sample(d::GameParams::classical(), 1000, 42), d::sample(d::GameParams::classical(), 1000, 43));
}

TEST(Sample, TruncatedMeanMatchesMoment) {
  // E[X | X <= 2^10] from draws conditioned by rejection.
  const auto v = d::sample(d::GameParams::classical(), 2'000'000, 11);
  double s = 0, s2 = 0;
  std::size_t m = 0;
  for (double x : v)
    if (x <= 1024) s += x, s2 += x * x, ++m;
  const double mean = s / m, sd = std::sqrt((s2 / m - mean * mean) / m);
  EXPECT_NEAR(mean, static_cast<double>(d::truncated_moment(1, 10)), 3 * sd);
}

TEST(Params, Rejected) {
  EXPECT_THROW(d::GameParams(0, 0.5), stpete::invalid_argument);
  EXPECT_THROW(d::GameParams(1, 1), stpete::invalid_argument);
}

TEST(Rng, StreamsDiffer) {
  auto a = stpete::Xoshiro256::for_stream(1, 0);
  auto b = stpete::Xoshiro256::for_stream(1, 1);
  auto a2 = stpete::Xoshiro256::for_stream(1, 0);
  EXPECT_NE(a(), b());
  a = stpete::Xoshiro256::for_stream(1, 0);
  EXPECT_EQ(a(), a2());
}
