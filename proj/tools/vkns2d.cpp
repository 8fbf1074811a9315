#include <iostream>

#include "vkns/cli.hpp"

int main(int argc, char** argv) { return vkns::cli::run(argc, argv, std::cout, std::cerr); }
