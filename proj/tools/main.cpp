#include <iostream>

#include "eqmin/cli.hpp"

int main(int argc, char** argv) { return eqmin::run(argc, argv, std::cout, std::cerr); }
