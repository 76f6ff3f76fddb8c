#include "ldpjudge/cli.hpp"

int main(int argc, char** argv) { return ldpjudge::cli::run(argc, argv); }
