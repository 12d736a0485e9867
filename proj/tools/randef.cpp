#include <iostream>
#include <string>
#include <vector>

#include "randef/cli.hpp"

int main(int argc, char** argv) {
  return randef::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
