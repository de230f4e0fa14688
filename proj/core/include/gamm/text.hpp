#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gamm {

/// Shortest decimal representation that parses back to the same double.
/// All on-disk float output goes through this so canonical files are
/// byte-stable across save/load round trips.
std::string format_double(double value);

/// Strict double parse of the whole (trimmed) token. Throws gamm::DataError
/// with `context` in the message on failure or non-finite input.
double parse_double(std::string_view token, const std::string& context);

/// Strict non-negative integer parse, same error convention.
long long parse_index(std::string_view token, const std::string& context);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace gamm
