#include "njode/cli.hpp"

int main(int argc, char** argv) { return njode::run_cli(argc, argv); }
