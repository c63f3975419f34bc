#include "spba/harness.hpp"

int main(int argc, char** argv) { return spba::cli_main(argc, argv); }
