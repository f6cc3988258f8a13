#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  maxdiv::cli::RunConfig cfg;
  if (auto code = maxdiv::cli::parse_args(argc, argv, cfg, std::cout, std::cerr)) return *code;
  return maxdiv::cli::run(cfg, std::cout, std::cerr);
}
