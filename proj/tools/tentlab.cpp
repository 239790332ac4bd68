#include "tentlab/cli.hpp"

int main(int argc, char** argv) { return tentlab::run_command(argc, argv); }
