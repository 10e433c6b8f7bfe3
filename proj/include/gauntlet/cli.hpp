#pragma once

#include <iostream>

namespace gauntlet {

// Entry point of the `gauntlet` binary. Returns the process exit status:
// 0 success, 1 usage or config error, 2 data or format error, 3 remote error,
// 4 internal error.
int run_cli(int argc, const char* const* argv, std::istream& in = std::cin,
            std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace gauntlet
