#include "mick/harness.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return mick::cli_main(argc, argv, std::cout, std::cerr);
}
