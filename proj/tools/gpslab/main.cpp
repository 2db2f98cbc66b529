#include <iostream>

#include "lab.hpp"

int main(int argc, char** argv) { return gpslab::cli::main(argc, argv, std::cout, std::cerr); }
