#include "bessopt/cli.hpp"

int main(int argc, char** argv) { return bessopt::cli::main_entry(argc, argv); }
