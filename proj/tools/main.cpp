#include "graphmix/cli.hpp"

int main(int argc, char** argv) { return graphmix::cli_main(argc, argv); }
