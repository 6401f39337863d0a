#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stpete/asymptotics.hpp"
#include "stpete/exact.hpp"

namespace as = stpete::asym;
namespace ex = stpete::exact;
namespace d = stpete::dist;

TEST(SnrTail, RatioNearOne) {
  const double x = 3 * 4096;
  const double exact = ex::trimmed_tail_exact(4, 1, static_cast<std::uint64_t>(x)).to_double();
  const double ratio = exact / static_cast<double>(as::snr_tail_rhs(4, 1, x).value);
  EXPECT_GE(ratio, 0.98);
  EXPECT_LE(ratio, 1.02);
}

TEST(SnrTail, LimitConstant) {
  // x^{r+1} 2^{-(r+1){log2 x}} P{S_{n,r} > x} -> C(5, 2) = 10.
  const std::uint64_t x = 3 * (std::uint64_t{1} << 16);
  const double p = ex::trimmed_tail_exact(5, 1, x).to_double();
  const double scaled = std::pow(static_cast<double>(x), 2) * std::pow(2.0, -2 * d::frac_log2(x)) * p;
  EXPECT_NEAR(scaled, 10, 0.2);
}

TEST(SnrTail, UntrimmedRearrangement) {
  for (double x : {12.0, 100.0, 3000.0, 70000.0}) {
    const auto a = as::snr_tail_rhs(4, 0, x);
    const double lhs = static_cast<double>(a.value / d::psi(x) * x / 4 - 1 - a.inner.value);
    EXPECT_NEAR(lhs, 0, 1e-12) << x;
  }
}

TEST(SnrTail, Rejects) {
  EXPECT_THROW(as::snr_tail_rhs(3, 3, 100), stpete::invalid_argument);
  EXPECT_THROW(as::snr_tail_rhs(3, 0, 1), stpete::invalid_argument);
}

TEST(FinerAs, Values) {
  // P{S_1 > 6} = 1/4, so 2^-12 * 2 * (1 + 1/4) = 5 * 2^-13.
  const auto a = as::finer_as_rhs(2, 0, 12, 6);
  EXPECT_NEAR(static_cast<double>(a.value), 5 * std::ldexp(1.0, -13), 1e-18);
  const double exact = ex::sum_tail_exact(2, 4096 + 6).to_double();
  EXPECT_NEAR(exact / static_cast<double>(a.value), 1, 0.01);
  EXPECT_NEAR(static_cast<double>(as::finer_as_rhs(1, 0, 9, 1.5).value), std::ldexp(1.0, -9), 1e-18);
}

TEST(SubexpLimits, Values) {
  const auto c = as::subexp_limits(d::GameParams::classical());
  EXPECT_DOUBLE_EQ(c.first, 2);
  EXPECT_DOUBLE_EQ(c.second, 4);
  const auto g = as::subexp_limits(d::GameParams(1, 1.0 / 3));
  EXPECT_DOUBLE_EQ(g.first, 2);
  EXPECT_NEAR(g.second, 3, 1e-12);
  EXPECT_LT(as::subexp_limits(d::GameParams(1, 0.001)).second, 2.01);
}

TEST(GenTail, ClassicalReduces) {
  const d::GameParams g;
  for (double x : {10.0, 100.0, 5000.0})
    EXPECT_EQ(as::gen_snr_tail_rhs(3, 1, x, g).value, as::snr_tail_rhs(3, 1, x).value);
}

TEST(GenTail, SingleTermIsExactTail) {
  const d::GameParams g(1.3, 0.4);
  for (double x : {3.0, 17.5, 400.0})
    EXPECT_NEAR(static_cast<double>(as::gen_snr_tail_rhs(1, 0, x, g).value / d::tail(x, g)), 1, 1e-9);
}

TEST(GenTail, ApproachesEnumeration) {
  const d::GameParams g(1, 1.0 / 3);
  const auto ratio = [&](double x) {
    return static_cast<double>(as::gen_snr_tail_rhs(3, 0, x, g).value / ex::enum_oracle(3, 0, x, g));
  };
  const double small = ratio(10), large = ratio(10 * std::pow(1.5, 8));
  EXPECT_NEAR(small, 1, 0.15);
  EXPECT_LT(std::abs(large - 1), std::abs(small - 1) + 1e-12);
}

TEST(UniformBound, Formula) {
  for (double x : {3.0, 10.0, 100.0}) EXPECT_NEAR(as::uniform_bound_rhs(0, x, 0.5, 0), 4 / x, 1e-14);
  double prev = INFINITY;
  for (double x = M_E; x < 1e4; x *= 1.7) {
    const double b = as::uniform_bound_rhs(2, x, 0.3, 5);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(as::uniform_bound_rhs(0, 2, 0.5, 0), stpete::invalid_argument);
  EXPECT_THROW(as::uniform_bound_rhs(0, 5, 1.0, 0), stpete::invalid_argument);
}

TEST(UniformBound, Calibration) {
  const std::vector<double> xs = {M_E, 5, 10};
  const std::vector<double> tails = {0.9, 0.1, 0.01};
  const double C = as::calibrate_uniform_C(1, 0.3, xs, tails);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_GE(as::uniform_bound_rhs(1, xs[i], 0.3, C) * (1 + 1e-12), tails[i]);
}
