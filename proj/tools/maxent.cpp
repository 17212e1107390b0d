#include "commands.hpp"

int main(int argc, char** argv) { return maxent::cli::run(argc, argv); }
