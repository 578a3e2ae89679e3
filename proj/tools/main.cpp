#include "fstat/cli.hpp"

int main(int argc, char** argv) { return fse::run_cli(argc, argv); }
