#include "benchirt/cli.hpp"

int main(int argc, char** argv) { return benchirt::cli::run(argc, argv); }
