#include <iostream>

#include "autofocus/cli.hpp"

int main(int argc, char** argv) { return autofocus::cli_dispatch(argc, argv, std::cout, std::cerr); }
