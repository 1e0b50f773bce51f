#include "vt/cli.hpp"

int main(int argc, char** argv) { return vt::cli::run(argc, argv); }
