#include <iostream>

#include "beamflow/cli.h"

int main(int argc, char** argv) {
  return beamflow::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
