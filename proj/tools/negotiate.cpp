#include "negotiate/cli.hpp"

int main(int argc, char** argv) { return negotiate::cli::main(argc, argv); }
