#include "covrank/cli.hpp"

int main(int argc, char** argv) { return covrank::cli::run(argc, argv); }
