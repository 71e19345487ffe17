#include "candlenet/cli/commands.hpp"

int main(int argc, char** argv) { return candlenet::cli::run(argc, argv); }
