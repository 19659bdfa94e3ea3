#include <iostream>

#include <qdl/cli.hpp>

int main(int argc, char** argv) { return qdl::cli::run(argc, argv, std::cout, std::cerr); }
