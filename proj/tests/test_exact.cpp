#include <gtest/gtest.h>

#include <vector>

#include "stpete/exact.hpp"

namespace ex = stpete::exact;
using stpete::DyadicProb;

namespace {
DyadicProb frac(unsigned num, unsigned log2_den) { return DyadicProb(num, log2_den).canonical(); }
}  // namespace

TEST(SumTail, SmallCases) {
  EXPECT_EQ(ex::sum_tail_exact(1, 5).canonical(), frac(1, 2));
  EXPECT_EQ(ex::sum_tail_exact(2, 6).canonical(), frac(1, 1));
  EXPECT_EQ(ex::sum_tail_exact(2, 4).canonical(), frac(3, 2));
}

TEST(SumTail, JsonShape) { EXPECT_EQ(ex::sum_tail_exact(2, 6).to_json(), R"({"num":"1","log2_den":1})"); }

TEST(TrimmedTail, SmallCases) {
  EXPECT_EQ(ex::trimmed_tail_exact(2, 1, 5).canonical(), frac(1, 4));
  EXPECT_EQ(ex::trimmed_tail_exact(2, 0, 6).canonical(), ex::sum_tail_exact(2, 6).canonical());
  EXPECT_EQ(ex::trimmed_tail_exact(4, 1, 40).canonical(), frac(3, 8));
}

TEST(TrimmedTail, MatchesEnumeration) {
  for (int n = 1; n <= 4; ++n)
    for (int r = 0; r < n; ++r)
      for (std::uint64_t x : {0, 1, 2, 3, 5, 7, 8, 13, 31, 64, 100, 255, 1000})
        EXPECT_EQ(ex::trimmed_tail_exact(n, r, x).canonical(), ex::enum_oracle(n, r, x).canonical())
            << "n=" << n << " r=" << r << " x=" << x;
}

TEST(TrimmedTail, RejectsBadInput) {
  EXPECT_THROW(ex::trimmed_tail_exact(3, 3, 10), stpete::invalid_argument);
  EXPECT_THROW(ex::trimmed_tail_exact(0, 0, 10), stpete::invalid_argument);
  ex::Limits lim;
  lim.cap = 1024;
  EXPECT_THROW(ex::sum_tail_exact(2, 4096, lim), stpete::invalid_argument);
}

TEST(TwoSumClosed, Values) {
  EXPECT_EQ(ex::two_sum_tail_closed(1, 2).canonical(), frac(1, 1));
  EXPECT_EQ(ex::two_sum_tail_closed(1, 1).canonical(), frac(3, 2));
  EXPECT_EQ(ex::two_sum_tail_closed(3, 3).canonical(), frac(15, 6));
}

TEST(TwoSumClosed, AgreesWithEngine) {
  for (int k = 1; k <= 8; ++k)
    for (int l = k; l <= 10; ++l) {
      const std::uint64_t x = (std::uint64_t{1} << k) + (std::uint64_t{1} << l);
      EXPECT_EQ(ex::two_sum_tail_closed(k, l).canonical(), ex::sum_tail_exact(2, x).canonical());
    }
}

TEST(EnumOracle, GeneralizedClassicalAgrees) {
  const stpete::dist::GameParams g;
  EXPECT_NEAR(static_cast<double>(ex::enum_oracle(2, 0, 6.0L, g)), 0.5, 1e-15);
  EXPECT_NEAR(static_cast<double>(ex::enum_oracle(1, 0, 5.0L, g)), 0.25, 1e-15);
}

TEST(ConvRatio, LimitPoints) {
  const std::vector<std::uint64_t> xs = {4096, 4095};
  const auto c = ex::conv_ratio_curve(xs);
  EXPECT_NEAR(c[0].ratio, 4, 0.01);
  EXPECT_NEAR(c[1].ratio, 2, 0.01);
  for (int k = 1; k <= 6; ++k)
    for (int l = k + 1; l <= 10; ++l) {
      const std::vector<std::uint64_t> x = {(std::uint64_t{1} << k) + (std::uint64_t{1} << l)};
      EXPECT_DOUBLE_EQ(ex::conv_ratio_curve(x)[0].ratio, 2 + 2 * std::ldexp(1.0, -k) - 4 * std::ldexp(1.0, -l));
    }
}
