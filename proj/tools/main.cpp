#include "tfcs/harness.hpp"

int main(int argc, char** argv) { return tfcs::cli_main(argc, argv); }
