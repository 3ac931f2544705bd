#include "hardyw/cli.hpp"

int main(int argc, char** argv) { return hardyw::cli::run_main(argc, argv); }
