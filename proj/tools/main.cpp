#include <iostream>

#include "dislogen/cli.hpp"

int main(int argc, char** argv) {
  return dislogen::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
