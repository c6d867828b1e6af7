#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace erkit::text {

// Permissive UTF-8 decode: each invalid byte becomes its own code point.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(const std::u32string& s);

bool is_space(char32_t c);

std::string ascii_lower(std::string_view s);

// Leading/trailing unicode whitespace removed.
std::string trim(std::string_view s);

// Internal whitespace runs collapsed to a single ' '.
std::string collapse_whitespace(std::string_view s);

// Split on unicode whitespace, drop empty tokens.
std::vector<std::string> split_tokens(std::string_view s);

// First `count` code points of a UTF-8 string.
std::string utf8_prefix(std::string_view s, std::size_t count);

// American Soundex: uppercase first letter + 3 digits, zero-padded.
// Returns "" when the input has no ASCII letter to code from.
std::string soundex(std::string_view s);

}  // namespace erkit::text
