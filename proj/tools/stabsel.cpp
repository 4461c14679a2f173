#include <stabsel/cli.hpp>

int main(int argc, char** argv) { return stabsel::cli::run(argc, argv); }
