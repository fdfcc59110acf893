#include "sepeff/cli.hpp"

int main(int argc, char** argv) { return sepeff::run_cli(argc, argv); }
