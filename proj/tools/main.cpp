#include "revphase/cli.hpp"

int main(int argc, char** argv) { return revphase::cli::run(argc, argv); }
