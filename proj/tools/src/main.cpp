#include "cli.hpp"

int main(int argc, char** argv) { return pianolm::cli::run(argc, argv); }
