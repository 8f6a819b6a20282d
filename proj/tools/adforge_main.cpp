#include "adforge/cli.hpp"

int main(int argc, char** argv) { return adforge::cli::dispatch(argc, argv); }
