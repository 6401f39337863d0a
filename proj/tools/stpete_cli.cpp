#include "stpete/cli.hpp"

int main(int argc, char** argv) { return stpete::cli::run(argc, argv); }
