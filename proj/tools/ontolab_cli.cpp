#include "ontolab/cli.hpp"

int main(int argc, char** argv) { return ontolab::cli_main(argc, argv); }
