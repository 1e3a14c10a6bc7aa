#include "anonbandits/cli.hpp"

int main(int argc, char** argv) { return anonbandits::cli_main(argc, argv); }
