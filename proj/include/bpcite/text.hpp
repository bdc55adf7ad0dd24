#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bpcite {

/// Half-open byte range [begin, end) into a UTF-8 string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(const Span& other) const { return begin <= other.begin && other.end <= end; }
  friend bool operator==(const Span&, const Span&) = default;
};

inline std::string_view slice(std::string_view text, Span s) { return text.substr(s.begin, s.size()); }

namespace text {

struct CodePoint {
  char32_t value;
  std::size_t length;  // bytes consumed
};

// Invalid sequences decode as a single Latin-1 byte so offsets always advance.
CodePoint decode_at(std::string_view s, std::size_t pos);
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
bool is_upper(char32_t c);
bool is_letter(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);
inline bool is_word_char(char32_t c) { return is_letter(c) || is_digit(c); }

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);
bool is_blank(std::string_view s);

/// Lowercased, diacritic-free ASCII view of a string. Every source code point
/// becomes exactly one byte; origin[i] is the source byte offset of folded
/// byte i and origin[text.size()] is the source length.
struct FoldedText {
  std::string text;
  std::vector<std::size_t> origin;

  Span to_source(std::size_t folded_begin, std::size_t folded_end) const {
    return {origin[folded_begin], origin[folded_end]};
  }
};

FoldedText fold(std::string_view s);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
inline std::string fingerprint(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace text
}  // namespace bpcite
