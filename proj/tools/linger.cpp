#include "cli/commands.hpp"

int main(int argc, char** argv)
{
    return linger::cli::run(argc, argv);
}
