#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "stpete/cli.hpp"

namespace fs = std::filesystem;
using stpete::cli::run;

namespace {

std::string capture(const std::vector<std::string>& args, int* code = nullptr) {
  testing::internal::CaptureStdout();
  const int rc = run(args);
  const std::string out = testing::internal::GetCapturedStdout();
  if (code) *code = rc;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("stpete_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Cli, CoverageIsComplete) {
  const std::set<std::string> ops = {
      "cdf", "tail", "psi", "truncated_cdf", "truncated_moment", "quantile", "sum_tail_exact",
      "trimmed_tail_exact", "enum_oracle", "conv_ratio_curve", "two_sum_tail_closed", "snr_tail_rhs",
      "finer_as_rhs", "subexp_limits", "gen_snr_tail_rhs", "p_weight", "r_weight", "log_cf_f",
      "cf_Wjgamma", "cf_Wgamma", "cdf_from_cf", "gstar_cdf", "sample_Y", "y_tail_rhs", "centering",
      "centering_closed", "a_const", "gamma_n", "xi_and_f", "chernoff_h", "chernoff_bound",
      "simulate_trimmed", "sample", "uniform_bound_rhs", "merge_check", "trimmed_merge_check",
      "max_pmf_check", "chernoff_check", "histogram_fig1", "oscillation_curve_fig2", "repro_all"};
  std::multiset<std::string> seen;
  for (const auto& [cmd, list] : stpete::cli::coverage()) {
    int rc = -1;
    testing::internal::CaptureStdout();
    rc = run({cmd, "--help"});
    testing::internal::GetCapturedStdout();
    EXPECT_EQ(rc, 0) << cmd;
    for (const auto& op : list) seen.insert(op);
  }
  for (const auto& op : ops) EXPECT_EQ(seen.count(op), 1u) << op;
  EXPECT_EQ(seen.size(), ops.size());
}

TEST(Cli, ExactTailJson) { EXPECT_EQ(capture({"exact-tail", "--n", "2", "--x", "6"}), "{\"num\":\"1\",\"log2_den\":1}\n"); }

TEST(Cli, TrimmedTailFixture) {
  EXPECT_EQ(capture({"trimmed-tail", "--n", "4", "--r", "1", "--x", "40"}), "{\"num\":\"3\",\"log2_den\":8}\n");
  EXPECT_EQ(capture({"trimmed-tail", "--n", "4", "--r", "1", "--x", "40", "--oracle"}),
            "{\"num\":\"3\",\"log2_den\":8}\n");
}

TEST(Cli, XiAndCentering) {
  const auto xi = nlohmann::json::parse(capture({"xi", "--gamma", "1"}));
  EXPECT_EQ(xi["xi"].get<double>(), 0);
  const auto c = nlohmann::json::parse(capture({"centering", "--n", "8", "--gamma", "1"}));
  EXPECT_NEAR(c["centering"].get<double>(), 3.125, 1e-14);
}

TEST(Cli, TailCsv) {
  const auto out = capture({"tail", "--x", "5"});
  EXPECT_NE(out.find("x,cdf,tail,psi"), std::string::npos);
  EXPECT_NE(out.find("5,0.75,0.25,1.25"), std::string::npos);
}

TEST(Cli, ValidationExitCodes) {
  int rc = 0;
  testing::internal::CaptureStderr();
  capture({"trimmed-tail", "--n", "3", "--r", "3", "--x", "10"}, &rc);
  auto err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.find("--r"), std::string::npos) << err;

  testing::internal::CaptureStderr();
  capture({"limit-cdf", "--gamma", "1.5", "--x", "0"}, &rc);
  err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.find("--gamma"), std::string::npos) << err;

  testing::internal::CaptureStderr();
  capture({"sample-y", "--gamma", "1", "--reps", "10"}, &rc);  // --seed missing
  err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.find("--seed"), std::string::npos) << err;

  testing::internal::CaptureStderr();
  capture({"no-such-command"}, &rc);
  testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 2);
}

TEST(Cli, ConvergenceExitCode) {
  // a nearly degenerate W_{j,gamma} needs a frequency range beyond the inversion budget
  int rc = 0;
  testing::internal::CaptureStderr();
  capture({"limit-cdf", "--gamma", "1", "--j", "-40", "--x", "0"}, &rc);
  testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 3);
}

TEST(Cli, OutIsAtomic) {
  const auto path = scratch("draws.csv");
  fs::remove(path);
  ASSERT_EQ(run({"mc-sim", "--draws", "100", "--seed", "3", "--out", path.string()}), 0);
  const auto body = slurp(path);
  EXPECT_NE(body.find("payoff"), std::string::npos);
  EXPECT_FALSE(fs::exists(path.string() + ".partial"));

  // a failing command leaves neither the target nor the temporary behind
  const auto bad = scratch("bad.csv");
  fs::remove(bad);
  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"tail", "--x", "3", "--ell", "2", "--out", bad.string()}), 2);
  testing::internal::GetCapturedStderr();
  EXPECT_FALSE(fs::exists(bad));
  EXPECT_FALSE(fs::exists(bad.string() + ".partial"));
  fs::remove_all(path.parent_path());
}

TEST(Cli, StochasticOutputIndependentOfThreads) {
  const auto a = scratch("y1.csv"), b = scratch("y3.csv");
  ASSERT_EQ(run({"sample-y", "--r", "1", "--gamma", "0.75", "--reps", "3000", "--seed", "5", "--threads", "1", "--out",
                 a.string()}),
            0);
  ASSERT_EQ(run({"sample-y", "--r", "1", "--gamma", "0.75", "--reps", "3000", "--seed", "5", "--threads", "3", "--out",
                 b.string()}),
            0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).rfind("# r=1 gamma=0.75", 0), 0u);
  fs::remove_all(a.parent_path());
}

TEST(Cli, ReproAllRejectsIncompleteConfig) {
  const auto cfg = scratch("partial.cfg");
  std::ofstream(cfg) << "seed = 1\n";
  testing::internal::CaptureStderr();
  const int rc = run({"repro-all", "--config", cfg.string()});
  const auto err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.find("--threads"), std::string::npos) << err;
  fs::remove_all(cfg.parent_path());
}
