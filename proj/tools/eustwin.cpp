#include "eustwin/cli.hpp"

int main(int argc, char** argv) { return eustwin::cli::run(argc, argv); }
