#include "bdfl/cli.hpp"

int main(int argc, char** argv) { return bdfl::run(argc, argv); }
