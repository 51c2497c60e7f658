#include "otclt/cli.hpp"

int main(int argc, char** argv) { return otclt::run_cli(argc, argv); }
