// Runs the fourteen acceptance checks and prints one line per check.
// Exit status is the number of failed checks.

#include <filesystem>
#include <iostream>
#include <string>
#include <unistd.h>

#include "stpete/acceptance.hpp"
#include "stpete/cli.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  stpete::fixtures::Config cfg;
  if (argc > 1) cfg = stpete::fixtures::load_file(argv[1]);
  const auto dir = fs::temp_directory_path() / ("stpete_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto results = stpete::acceptance::run_all(
      cfg, [](const std::vector<std::string>& a) { return stpete::cli::run(a); }, dir.string());
  fs::remove_all(dir);
  int failed = 0;
  for (const auto& r : results) {
    failed += !r.pass;
    std::cout << stpete::acceptance::format_line(r) << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " of 14 acceptance checks failed" : "all 14 acceptance checks passed")
            << std::endl;
  return failed;
}
