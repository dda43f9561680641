#include "lowrank_align/cli/commands.hpp"

int main(int argc, char** argv) { return lowrank_align::cli::run(argc, argv); }
