#include "bpcite/text.hpp"

#include <cstdio>

namespace bpcite::text {

CodePoint decode_at(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](std::size_t i) {
    return pos + i < s.size() && (static_cast<unsigned char>(s[pos + i]) & 0xC0) == 0x80;
  };
  auto bits = [&](std::size_t i) { return static_cast<char32_t>(static_cast<unsigned char>(s[pos + i]) & 0x3F); };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x1F) << 6) | bits(1);
    if (cp >= 0x80) return {cp, 2};
  } else if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
    if (cp >= 0x800) return {cp, 3};
  } else if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
    if (cp >= 0x10000 && cp <= 0x10FFFF) return {cp, 4};
  }
  return {b0, 1};
}

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto cp = decode_at(s, i);
    out.push_back(cp.value);
    i += cp.length;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
  return c;
}

char32_t to_upper(char32_t c) {
  if (c >= U'a' && c <= U'z') return c - 32;
  if ((c >= 0xE0 && c <= 0xFE) && c != 0xF7) return c - 32;
  return c;
}

bool is_upper(char32_t c) { return (c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7); }

bool is_letter(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c >= 0xC0 && c <= 0xFF) return c != 0xD7 && c != 0xF7;
  return c >= 0x100 && c <= 0x24F;
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0xA0: case 0x2028: case 0x2029: case 0x202F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto cp = decode_at(s, i);
    append_utf8(out, to_lower(cp.value));
    i += cp.length;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end) {
    auto cp = decode_at(s, begin);
    if (!is_space(cp.value)) break;
    begin += cp.length;
  }
  // Trailing whitespace we care about is ASCII or NBSP; walk back bytewise.
  while (end > begin) {
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
    auto cp = decode_at(s, start);
    if (start + cp.length != end || !is_space(cp.value)) break;
    end = start;
  }
  return std::string(s.substr(begin, end - begin));
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

namespace {

char fold_char(char32_t c) {
  if (c < 0x80) {
    auto ch = static_cast<char>(c);
    return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch + 32) : ch;
  }
  if (c == 0xA0 || is_space(c)) return ' ';
  if (c == 0xAA) return 'a';
  if (c == 0xBA || c == 0xB0) return 'o';
  if (c >= 0xC0 && c <= 0xFF) {
    char32_t l = to_lower(c);
    if (l >= 0xE0 && l <= 0xE5) return 'a';
    if (l == 0xE7) return 'c';
    if (l >= 0xE8 && l <= 0xEB) return 'e';
    if (l >= 0xEC && l <= 0xEF) return 'i';
    if (l == 0xF1) return 'n';
    if ((l >= 0xF2 && l <= 0xF6) || l == 0xF8) return 'o';
    if (l >= 0xF9 && l <= 0xFC) return 'u';
    if (l == 0xFD || l == 0xFF) return 'y';
  }
  return '\x1a';
}

}  // namespace

FoldedText fold(std::string_view s) {
  FoldedText out;
  out.text.reserve(s.size());
  out.origin.reserve(s.size() + 1);
  for (std::size_t i = 0; i < s.size();) {
    auto cp = decode_at(s, i);
    out.text.push_back(fold_char(cp.value));
    out.origin.push_back(i);
    i += cp.length;
  }
  out.origin.push_back(s.size());
  return out;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace bpcite::text
