#include "cli.hpp"

int main(int argc, char** argv) { return spectrack::cli::run(argc, argv); }
