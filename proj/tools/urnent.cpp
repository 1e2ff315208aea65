#include "urnent/commands.hpp"

int main(int argc, char** argv) { return urnent::cli::run(argc, argv); }
