#include "predfb/cli.hpp"

int main(int argc, char** argv) { return predfb::run_cli(argc, argv); }
