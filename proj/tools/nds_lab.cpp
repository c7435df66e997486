// SPDX-License-Identifier: Apache-2.0
#include "ndslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ndslab::cli_dispatch(argc, argv, std::cout, std::cerr);
}
