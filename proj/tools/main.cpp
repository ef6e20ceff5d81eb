#include "cli.hpp"

int main(int argc, char** argv) { return lpf::cli::main_entry(argc, argv); }
