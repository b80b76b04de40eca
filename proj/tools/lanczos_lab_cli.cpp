#include <lanczos_lab/harness/cli.hpp>

int main(int argc, char** argv) { return lanczos_lab::harness::cli_main(argc, argv); }
