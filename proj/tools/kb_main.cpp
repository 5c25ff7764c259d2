#include "kb/cli.hpp"

int main(int argc, char** argv) { return kb::run(argc, argv); }
