#include <iostream>

#include "entsampler/cli.hpp"

int main(int argc, char** argv) { return entsampler::cli::run(argc, argv, std::cout, std::cerr); }
