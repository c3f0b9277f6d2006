#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fr {

/// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
/// 3 numeric failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fr
