#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reinfix {

std::string trim(std::string_view s);

/// Longest prefix of at most `max_bytes` bytes that does not split a UTF-8 sequence.
std::string utf8_prefix(std::string_view s, std::size_t max_bytes);

/// Drops trailing spaces, tabs and carriage returns from every line.
std::string trim_trailing_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace reinfix
