#include "secan/cli.hpp"

int main(int argc, char** argv) { return secan::run_cli(argc, argv); }
