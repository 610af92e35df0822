#include <iostream>
#include <string>
#include <vector>

#include "crowd/cli.hpp"

int main(int argc, char** argv) {
  return crowd::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
