#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace fjd {

/// Runs one CLI invocation. Exit codes: 0 success, 1 usage error, 2 data or
/// format error, 3 numerical failure.
int cli_dispatch(int argc, const char* const* argv);
/// Same, with the program name omitted from `args` and explicit streams.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping a command: the Error kind when it has
/// one, otherwise 2.
int exit_code(const std::exception& e);

}  // namespace fjd
