#include <hsl/cli.hpp>

int main(int argc, char** argv) { return hsl::cli::main(argc, argv); }
