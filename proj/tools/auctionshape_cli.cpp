#include <iostream>

#include "auctionshape/cli.hpp"

int main(int argc, char** argv) {
  return auctionshape::cli::run(argc, argv, std::cout, std::cerr);
}
