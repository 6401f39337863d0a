// Removing the largest payoff: quantiles of S_n/n - log2 n and of the
// trimmed version, against the limit laws.

#include <cstdio>

#include "stpete/limitlaw.hpp"
#include "stpete/montecarlo.hpp"

int main() {
  using namespace stpete;
  const std::uint64_t n = 1024;
  const auto g = dist::GameParams::classical();
  const auto full = mc::simulate_trimmed({n, 0, 100'000, 1, 0}, g, mc::Normalization::log_shifted);
  const auto trim = mc::simulate_trimmed({n, 1, 100'000, 2, 0}, g, mc::Normalization::log_shifted);
  const limit::SemistableTables tables(dist::gamma_n(n));
  std::printf("%6s  %10s %10s  %10s %10s\n", "x", "P{S>x}", "1-G", "P{S*>x}", "1-G*");
  for (double x : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0})
    std::printf("%6.1f  %10.5f %10.5f  %10.5f %10.5f\n", x, full.tail(x), 1 - tables.g_mixture(x), trim.tail(x),
                1 - tables.gstar(x));
}
