#pragma once

// Helpers shared by the text file readers and writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ced {

/// Decimal with 17 significant digits; parses back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);
std::vector<std::string> split_csv(std::string_view line);

/// "key = value" with surrounding whitespace stripped; nullopt without '='.
std::optional<std::pair<std::string, std::string>> parse_key_value(std::string_view line);

// Strict parsers: the whole field must be consumed. Throw InputError.
double parse_double(std::string_view s);
int parse_int(std::string_view s);
std::size_t parse_size(std::string_view s, std::string_view what = "value");
std::uint64_t parse_u64(std::string_view s, std::string_view what = "value");

}  // namespace ced
