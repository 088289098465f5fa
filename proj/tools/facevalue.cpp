#include <iostream>

#include "facevalue/cli.hpp"

int main(int argc, char** argv) { return facevalue::cli::run(argc, argv, std::cout, std::cerr); }
