#include "commands.h"

int main(int argc, char** argv) { return epipolar::cli::Main(argc, argv); }
