#include "snowheat/cli.hpp"

int main(int argc, char** argv) { return snowheat::cli::run(argc, argv); }
