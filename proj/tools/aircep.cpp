#include "aircep/cli.hpp"

int main(int argc, char** argv) { return aircep::cli_dispatch(argc, argv); }
