#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) {
  return modeshape::cli::run(argc, argv, std::cout, std::cerr);
}
