#include <iostream>

#include "gaussfpt/cli.hpp"

int main(int argc, char** argv) { return gaussfpt::run(argc, argv, std::cout, std::cerr); }
