#include "streamad/cli.hpp"

int main(int argc, char** argv) { return streamad::cli::main(argc, argv); }
