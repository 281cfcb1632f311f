#include "commands.hpp"

int main(int argc, char** argv) { return nospread::cli::run(argc, argv); }
