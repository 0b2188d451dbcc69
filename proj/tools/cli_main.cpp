#include "cli_commands.hpp"

int main(int argc, char** argv) { return ddpc::cli::run(argc, argv); }
