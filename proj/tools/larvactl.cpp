#include "larvae/cli.hpp"

int main(int argc, char** argv) { return larvae::dispatch(argc, argv); }
