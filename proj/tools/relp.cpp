#include "relp/cli.hpp"

int main(int argc, char** argv) { return relp::cli::run(argc, argv); }
