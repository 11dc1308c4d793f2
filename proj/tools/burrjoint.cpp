#include "burrjoint/cli.hpp"

int main(int argc, char** argv) { return burrjoint::cli::run(argc, argv); }
