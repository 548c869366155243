#include "recover/cli.hpp"

int main(int argc, char** argv) { return recover::cli_main(argc, argv); }
