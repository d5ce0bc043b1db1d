#include <iostream>

#include <unistd.h>

#include "modtt/cli.hpp"

int main(int argc, char** argv) {
  modtt::cli::Streams io{std::cout, std::cerr, isatty(STDERR_FILENO) != 0};
  return modtt::cli::run(argc, argv, io);
}
