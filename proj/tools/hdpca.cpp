#include "hdpca/cli.hpp"

int main(int argc, char** argv) { return hdpca::cli::run(argc, argv); }
