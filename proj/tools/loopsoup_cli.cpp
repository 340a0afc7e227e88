#include "loopsoup/cli.hpp"

int main(int argc, char** argv) { return loopsoup::cli::main(argc, argv); }
