#include "texfuse/pipeline.hpp"

int main(int argc, char** argv) { return texfuse::run_cli(argc, argv); }
