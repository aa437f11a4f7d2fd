#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace provkernel {

using StringMap = std::map<std::string, std::string>;

// SHA-256 of `bytes`, as 64 lowercase hex chars.
std::string sha256_hex(std::string_view bytes);
// SHA-256 of `bytes`, as the 32 raw digest bytes.
std::string sha256_raw(std::string_view bytes);

std::string to_hex(std::string_view bytes);
// Throws ParseError on odd length or non-hex characters.
std::string from_hex(std::string_view hex);
bool is_hex_digest(std::string_view text);

// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string now_utc();

// Zero-padded to six digits so lexicographic order matches numeric order.
std::string pad6(std::uint64_t value);
// Parses a non-negative decimal; returns false on any non-digit.
bool parse_uint(std::string_view text, std::uint64_t& out);

// A path segment: [A-Za-z0-9_.-]+ and not "." or "..".
bool is_valid_segment(std::string_view segment);
// Slash-separated segments, each valid; no leading/trailing/double slashes.
bool is_valid_relative_path(std::string_view path);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view text);

// Whitespace-separated decimal numbers; returns false if any token fails.
bool parse_numeric_vector(std::string_view text, std::vector<double>& out);
// Shortest round-trip decimal form, space separated.
std::string format_numeric_vector(const std::vector<double>& values);

// First 64 bits of SHA-256(text), big-endian.
std::uint64_t hash64(std::string_view text);
// Maps hash64(text) onto [0, 1).
double unit_interval(std::string_view text);

}  // namespace provkernel
