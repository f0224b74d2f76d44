// SPDX-License-Identifier: Apache-2.0
#include <swirl/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return swirl::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
