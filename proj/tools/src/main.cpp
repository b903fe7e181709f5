#include "tactile_cli/cli.hpp"

int main(int argc, char** argv) { return tactile::cli::run_cli(argc, argv); }
