#include "evl/text.hpp"

#include <cstdio>

namespace evl::text {

namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

unsigned char fold(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<unsigned char>(c - 'A' + 'a') : c;
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Length of the valid UTF-8 sequence starting at s[i], or 0 if invalid.
std::size_t valid_sequence(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return 1;
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (c >= 0xC2 && c <= 0xDF) {
    len = 2;
    cp = c & 0x1F;
  } else if (c >= 0xE0 && c <= 0xEF) {
    len = 3;
    cp = c & 0x0F;
  } else if (c >= 0xF0 && c <= 0xF4) {
    len = 4;
    cp = c & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto cc = static_cast<unsigned char>(s[i + k]);
    if (!is_continuation(cc)) return 0;
    cp = (cp << 6) | (cc & 0x3F);
  }
  // Overlong forms, surrogates, and values past U+10FFFF.
  if (len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) return 0;
  if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return 0;
  return len;
}

}  // namespace

std::string sanitize_utf8(std::string_view raw) {
  if (raw.starts_with("\xEF\xBB\xBF")) raw.remove_prefix(3);
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const std::size_t len = valid_sequence(raw, i);
    if (len == 0) {
      out += kReplacement;
      ++i;
      while (i < raw.size() && is_continuation(static_cast<unsigned char>(raw[i]))) ++i;
    } else {
      out.append(raw.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (const char ch : trim(s)) {
    if (is_space(static_cast<unsigned char>(ch))) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(fold(static_cast<unsigned char>(ch)));
  return out;
}

std::string normalize(std::string_view s) { return ascii_lower(collapse_whitespace(s)); }

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto word = [&](std::size_t k) {
    return k < s.size() && is_word_byte(static_cast<unsigned char>(s[k]));
  };
  while (i < s.size()) {
    if (!word(i)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size()) {
      if (word(i)) {
        ++i;
      } else if (s[i] == '\'' && i > start && word(i + 1)) {
        ++i;
      } else {
        break;
      }
    }
    out.push_back({s.substr(start, i - start), start});
  }
  return out;
}

std::vector<std::size_t> find_words(std::string_view haystack, std::string_view needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > haystack.size()) return hits;
  std::size_t i = 0;
  while (i + needle.size() <= haystack.size()) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (fold(static_cast<unsigned char>(haystack[i + k])) !=
          fold(static_cast<unsigned char>(needle[k]))) {
        match = false;
        break;
      }
    }
    const bool left_ok = i == 0 || !is_word_byte(static_cast<unsigned char>(haystack[i - 1]));
    const std::size_t end = i + needle.size();
    const bool right_ok =
        end == haystack.size() || !is_word_byte(static_cast<unsigned char>(haystack[end]));
    if (match && left_ok && right_ok) {
      hits.push_back(i);
      i = end;
    } else {
      ++i;
    }
  }
  return hits;
}

std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  for (const char ch : s) {
    if (!is_continuation(static_cast<unsigned char>(ch))) ++n;
  }
  return n;
}

std::size_t codepoint_offset(std::string_view s, std::size_t byte_offset) {
  return codepoint_length(s.substr(0, byte_offset));
}

std::size_t byte_offset(std::string_view s, std::size_t codepoint_offset) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(s[i]))) continue;
    if (seen == codepoint_offset) return i;
    ++seen;
  }
  return seen == codepoint_offset ? s.size() : std::string_view::npos;
}

std::string_view codepoint_slice(std::string_view s, std::size_t begin, std::size_t end) {
  const std::size_t b = byte_offset(s, begin);
  const std::size_t e = byte_offset(s, end);
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) return {};
  return s.substr(b, e - b);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v, int digits) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf + (16 - digits), static_cast<std::size_t>(digits));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace evl::text
