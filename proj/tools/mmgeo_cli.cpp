#include "mmg/lab.hpp"

int main(int argc, char** argv) { return mmg::cli_main(argc, argv); }
