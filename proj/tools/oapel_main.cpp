#include "oapel/commands.hpp"

int main(int argc, char** argv) { return oapel::cli::run(argc, argv); }
