#include <lcf/cli.hpp>

int main(int argc, char** argv) { return lcf::cli::run(argc, argv); }
