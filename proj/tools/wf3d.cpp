#include "wf3d/cli.hpp"

int main(int argc, char** argv) { return wf3d::cli::run(argc, argv); }
