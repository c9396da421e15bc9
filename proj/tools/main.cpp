#include "mbcs/cli.hpp"

int main(int argc, char** argv) { return mbcs::run_cli(argc, argv); }
