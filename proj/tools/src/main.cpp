#include "runner.hpp"

int main(int argc, char** argv) { return ckn::cli::run_main(argc, argv); }
