// adaptp command-line tool
#include "adaptp/cli.hpp"

int main(int argc, char **argv) { return adaptp::cli::run(argc, argv); }
