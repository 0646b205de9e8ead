#include "hypgreen/cli.hpp"

int main(int argc, char** argv) { return hypgreen::cli::run(argc, argv); }
