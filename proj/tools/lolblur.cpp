#include "lolb/cli/commands.hpp"

int main(int argc, char** argv) { return lolb::cli::run(argc, argv); }
