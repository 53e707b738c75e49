#include "volform/cli.hpp"

int main(int argc, char** argv) { return volform::cli::run(argc, argv); }
