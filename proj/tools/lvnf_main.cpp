#include "lvnf/cli.hpp"

int main(int argc, char** argv) { return lvnf::run_cli(argc, argv); }
