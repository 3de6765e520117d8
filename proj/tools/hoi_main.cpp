#include "hoi/cli.hpp"

int main(int argc, char** argv) { return hoi::cli::run(argc, argv); }
