#include "hidim/cli.hpp"

int main(int argc, char** argv) { return hidim::cli::run(argc, argv); }
