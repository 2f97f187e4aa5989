#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pianolm::cli {

/// Entry point shared by the executable and the tests. args[0] is the
/// program name. Returns 0 on success, 1 on a failed operation and 2 on a
/// usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace pianolm::cli
