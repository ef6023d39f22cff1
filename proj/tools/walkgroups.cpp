#include "walkgroups/cli.hpp"

int main(int argc, char** argv) { return walkgroups::cli::run(argc, argv); }
