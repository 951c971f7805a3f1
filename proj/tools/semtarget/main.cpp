#include <iostream>

#include "semtarget/cli.hpp"

int main(int argc, char** argv) {
  return semtarget::cli::run(argc, argv, std::cout, std::cerr);
}
