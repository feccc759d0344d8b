#include "graf/cli.hpp"

int main(int argc, char** argv) { return graf::run_cli(argc, argv); }
