#include "cli.hpp"

int main(int argc, char** argv) { return sparsechan::cli::run_cli(argc, argv); }
