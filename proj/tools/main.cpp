#include "framepred/cli.hpp"

int main(int argc, char** argv) { return framepred::cli_main(argc, argv); }
