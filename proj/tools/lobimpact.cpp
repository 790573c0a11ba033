#include "lobimpact/cli.hpp"

int main(int argc, char** argv) { return lobimpact::cli::main(argc, argv); }
