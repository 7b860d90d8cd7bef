#include "pric3/cli.hpp"

int main(int argc, char** argv) { return pric3::run_cli(argc, argv); }
