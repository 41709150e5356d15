#include "cli.hpp"

int main(int argc, char** argv) { return rankminer::cli::run_cli(argc, argv); }
