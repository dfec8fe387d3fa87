#include "wghp/cli.hpp"

int main(int argc, char** argv)
{
    return wghp::cli::main_entry(argc, argv);
}
