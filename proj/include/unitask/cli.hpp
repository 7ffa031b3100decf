#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unitask {

// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unitask
