#include "topt/cli.hpp"

int main(int argc, char** argv) { return topt::cli::run(argc, argv); }
