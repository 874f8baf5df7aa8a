#include "rmtres/cli.hpp"

int main(int argc, char** argv) { return rmtres::run_cli(argc, argv); }
