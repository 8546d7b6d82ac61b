#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace csiloc {

// Runs one command-line invocation in-process. args excludes the program
// name. Returns the process exit code: 0 success, 1 usage or configuration
// error, 2 data or format error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

} // namespace csiloc
