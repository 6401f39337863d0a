#pragma once

// Seeds, sample sizes and tolerances of the acceptance suite. Every value
// can be overridden from a key = value file; a file must name every key.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stpete/errors.hpp"

namespace stpete::fixtures {

struct Config {
  std::uint64_t seed = 20140527;
  unsigned threads = 0;

  // Exact-vs-asymptotic
  double theorem1_tol = 0.02;
  int band_cap_log2 = 19;

  // Limit laws
  double moment_tol = 1e-6;
  double backend_tol = 1e-10;
  double weight_tol = 1e-12;

  // Merging
  std::uint64_t merge_reps = 200'000;
  int merge_log2_n = 12;
  int merge_small_log2_n = 6;
  double ks_tol = 0.05;

  // Trimmed limit
  std::uint64_t y_samples = 10'000'000;
  std::uint64_t y_truncation = 10'000;
  double y_ratio_tol = 0.1;

  // Chernoff
  std::uint64_t chernoff_reps = 1'000'000;

  // Generalized game: rhs / enumeration at (n=3, r=0, p=1/3, x=10) and x 1.5^8
  double gen_tol_small_x = 0.15;
  double gen_tol_large_x = 0.02;

  // Figures
  std::uint64_t fig1_reps = 1'000'000;
  double fig1_bin = 0.25;
  double fig1_ratio_max = 0.25;
  std::uint64_t fig2_xmax = 16384;

  // Determinism
  std::uint64_t determinism_reps = 20'000;
};

namespace detail {

inline std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace detail

/// Visits every (key, field) pair of the config.
template <class Config_, class F>
void for_each_field(Config_& c, F&& f) {
  f("seed", c.seed);
  f("threads", c.threads);
  f("theorem1_tol", c.theorem1_tol);
  f("band_cap_log2", c.band_cap_log2);
  f("moment_tol", c.moment_tol);
  f("backend_tol", c.backend_tol);
  f("weight_tol", c.weight_tol);
  f("merge_reps", c.merge_reps);
  f("merge_log2_n", c.merge_log2_n);
  f("merge_small_log2_n", c.merge_small_log2_n);
  f("ks_tol", c.ks_tol);
  f("y_samples", c.y_samples);
  f("y_truncation", c.y_truncation);
  f("y_ratio_tol", c.y_ratio_tol);
  f("chernoff_reps", c.chernoff_reps);
  f("gen_tol_small_x", c.gen_tol_small_x);
  f("gen_tol_large_x", c.gen_tol_large_x);
  f("fig1_reps", c.fig1_reps);
  f("fig1_bin", c.fig1_bin);
  f("fig1_ratio_max", c.fig1_ratio_max);
  f("fig2_xmax", c.fig2_xmax);
  f("determinism_reps", c.determinism_reps);
}

/// Reads a config; throws invalid_argument naming the first missing or
/// malformed key.
inline Config load(std::istream& in) {
  const auto kv = detail::parse_kv(in);
  Config c;
  for_each_field(c, [&](const char* key, auto& field) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw invalid_argument(key, "missing config key");
    std::istringstream ss(it->second);
    if (!(ss >> field) || !ss.eof()) throw invalid_argument(key, "malformed value '" + it->second + "'");
  });
  return c;
}

inline Config load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_argument("config", "cannot open " + path);
  return load(in);
}

inline std::string to_text(const Config& c) {
  std::ostringstream os;
  os.precision(17);
  for_each_field(c, [&](const char* key, const auto& field) { os << key << " = " << field << "\n"; });
  return os.str();
}

}  // namespace stpete::fixtures
