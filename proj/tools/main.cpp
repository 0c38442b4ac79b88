#include <iostream>

#include "toxlabel/cli.h"

int main(int argc, char** argv) { return toxlabel::run_cli(argc, argv, std::cout, std::cerr); }
