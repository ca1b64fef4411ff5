#include "eqsadj/cli.hpp"

int main(int argc, char** argv) { return eqsadj::run_cli(argc, argv); }
