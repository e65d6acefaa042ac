#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtlab {

// Exit codes of run_cli.
enum ExitCode : int { ExitOk = 0, ExitChecksFailed = 1, ExitConfigInvalid = 2, ExitModuleError = 3 };

// Entry point of the mtlab tool; argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtlab
