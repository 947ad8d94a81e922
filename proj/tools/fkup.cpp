#include "fkup/harness.hpp"

int main(int argc, char** argv) { return fkup::cli_main(argc, argv); }
