#include "longctx/cli.hpp"

int main(int argc, char** argv) { return longctx::run_cli(argc, argv); }
