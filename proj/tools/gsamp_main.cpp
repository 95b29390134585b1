#include "gsamp/cli.hpp"

int main(int argc, char** argv) { return gsamp::run_cli(argc, argv); }
