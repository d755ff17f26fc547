#include <iostream>

#include "ctmcsens/cli/commands.hpp"

int main(int argc, char** argv) { return ctmcsens::cli::run_cli(argc, argv, std::cout, std::cerr); }
