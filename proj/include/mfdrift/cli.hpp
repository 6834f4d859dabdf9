#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfdrift {

/// Exit codes: 0 success, 1 invalid arguments or configuration, 2 runtime or
/// numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfdrift
