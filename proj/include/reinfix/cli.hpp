#pragma once

#include <iosfwd>
#include <string_view>

namespace reinfix::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Runs one command line. Exit codes: 0 success, 1 negative outcome or
/// runtime failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reinfix::cli
