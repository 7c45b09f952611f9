#include <iostream>

#include "sdcancel/experiments.hpp"

int main(int argc, char** argv) {
  return sdcancel::cli_main(argc, argv, std::cout, std::cerr);
}
