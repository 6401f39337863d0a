// x P{S_n > x} for n = 16 on one octave: it swings between n and 2n.

#include <cstdio>

#include "stpete/exact.hpp"

int main() {
  const int n = 16;
  for (std::uint64_t x = 4096; x <= 8192; x += 256) {
    const double v = static_cast<double>(x) * stpete::exact::sum_tail_exact(n, x).to_double();
    std::printf("%6llu  %8.4f\n", static_cast<unsigned long long>(x), v);
  }
}
