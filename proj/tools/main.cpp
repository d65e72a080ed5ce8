#include "sibp/cli.hpp"

int main(int argc, char** argv) { return sibp::run_cli(argc, argv); }
