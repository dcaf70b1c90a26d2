#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evl::text {

/// Decodes `raw` as UTF-8, replacing every invalid sequence with U+FFFD and
/// dropping a leading byte-order mark.
std::string sanitize_utf8(std::string_view raw);

std::string_view trim(std::string_view s);

/// Trims and collapses every run of ASCII whitespace into one space.
std::string collapse_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

/// trim + collapse + lowercase. Used for cache keys and entity identity.
std::string normalize(std::string_view s);

bool is_blank(std::string_view s);

/// Bytes that belong to a word: ASCII alphanumerics and any non-ASCII byte.
inline bool is_word_byte(unsigned char c) {
  return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

struct Token {
  std::string_view text;
  std::size_t offset = 0;  // byte offset into the source
};

/// Splits into word tokens. An apostrophe between two word bytes stays inside
/// the word ("don't").
std::vector<Token> tokenize(std::string_view s);

/// Byte offsets of every case-insensitive, word-bounded occurrence of
/// `needle` in `haystack`, left to right and non-overlapping.
std::vector<std::size_t> find_words(std::string_view haystack, std::string_view needle);

/// Number of code points in a valid UTF-8 string.
std::size_t codepoint_length(std::string_view s);

/// Converts a byte offset (on a code point boundary) to a code point offset.
std::size_t codepoint_offset(std::string_view s, std::size_t byte_offset);

/// Converts a code point offset to a byte offset; returns npos when past the end.
std::size_t byte_offset(std::string_view s, std::size_t codepoint_offset);

/// Slice by code point range [begin, end).
std::string_view codepoint_slice(std::string_view s, std::size_t begin, std::size_t end);

std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t v, int digits = 16);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace evl::text
