#include <iostream>
#include <string>
#include <vector>

#include "hee/cli.hpp"

int main(int argc, char** argv) {
  return hee::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
