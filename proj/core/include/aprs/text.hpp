#pragma once

// Small text helpers shared by the parsers, writers and the CLI.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aprs::text {

// std::getline that also strips a trailing '\r' (DOS line endings).
bool read_line(std::istream& in, std::string& line);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

std::string to_upper(std::string_view s);

// Strict parses: the whole token must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

// %.{digits}g rendering; non-finite values render as ".".
std::string format_real(double value, int significant_digits);

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// Flat "key=value" documents. Blank lines and lines starting with '#' are
// skipped; whitespace around keys and values is trimmed. Keys may repeat.
using KeyValueList = std::vector<std::pair<std::string, std::string>>;
KeyValueList parse_key_values(std::istream& in);

}  // namespace aprs::text
