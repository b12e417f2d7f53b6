#include "fjd/cli.hpp"

int main(int argc, char** argv) { return fjd::cli_dispatch(argc, argv); }
