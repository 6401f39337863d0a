#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stpete/exact.hpp"
#include "stpete/montecarlo.hpp"

namespace mc = stpete::mc;

TEST(EmpiricalTail, Basics) {
  const mc::EmpiricalTail e({1, 2, 2, 3});
  EXPECT_DOUBLE_EQ(e.tail(2), 0.25);
  EXPECT_DOUBLE_EQ(e.tail(0), 1);
  EXPECT_DOUBLE_EQ(e.cdf(3), 1);
}

TEST(Ks, TieAware) {
  // two atoms of mass 1/2 against the uniform law on [0, 1]
  const mc::EmpiricalTail e({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(mc::ks_distance(e, [](double x) { return std::clamp(x, 0.0, 1.0); }), 0.5);
}

TEST(Simulate, MatchesExactTail) {
  const auto e = mc::simulate_trimmed({4, 1, 200'000, 17, 0}, stpete::dist::GameParams::classical(),
                                      mc::Normalization::raw);
  for (std::uint64_t x : {5, 10, 40, 100}) {
    const double p = stpete::exact::trimmed_tail_exact(4, 1, x).to_double();
    EXPECT_NEAR(e.tail(static_cast<double>(x)), p, e.ci_halfwidth(static_cast<double>(x)) + 1e-4) << x;
  }
}

TEST(Simulate, ThreadIndependent) {
  const auto g = stpete::dist::GameParams::classical();
  const auto a = mc::simulate_trimmed({32, 2, 5000, 5, 1}, g, mc::Normalization::centered);
  const auto b = mc::simulate_trimmed({32, 2, 5000, 5, 3}, g, mc::Normalization::centered);
  EXPECT_EQ(a.sorted(), b.sorted());
}

TEST(MaxPmf, WithinNoise) {
  for (const auto& row : mc::max_pmf_check(256, 100'000, 3)) EXPECT_LT(std::abs(row.deviation), 4 * row.sigma + 0.01) << row.j;
}

TEST(Merge, KsBelowTolerance) {
  EXPECT_LT(mc::merge_check(1024, 30'000, 21).ks, 0.05);
  EXPECT_LT(mc::trimmed_merge_check(1024, 30'000, 22).ks, 0.05);
}

TEST(Chernoff, BoundHolds) {
  const std::vector<double> xs = {0.5, 1, 2, 4};
  for (const auto& row : mc::chernoff_check(256, 0, xs, 100'000, 9)) EXPECT_FALSE(row.violated) << row.x;
}

TEST(Fig2, OscillatesBetweenBands) {
  const auto xs = mc::fig2_grid(4096, 16);
  for (const auto& pt : mc::oscillation_curve_fig2(4, xs))
    if (pt.x >= 128) {
      EXPECT_GT(pt.value, 4 * 0.9);
      EXPECT_LT(pt.value, 8 * 1.1);
    }
}

TEST(Fig1, Shape) {
  const auto d = mc::histogram_fig1(128, 50'000, 4);
  std::uint64_t s = 0, t = 0;
  for (auto c : d.sum.counts) s += c;
  for (auto c : d.trimmed.counts) t += c;
  EXPECT_EQ(s, 50'000u);
  EXPECT_EQ(t, 50'000u);
  EXPECT_GT(d.sum.mass_above(d.side_lobe_threshold), d.trimmed.mass_above(d.side_lobe_threshold));
}
