#include "cli.hpp"

int main(int argc, char** argv) { return ose::cli::dispatch(argc, argv); }
