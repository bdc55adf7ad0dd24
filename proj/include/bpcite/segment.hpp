#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bpcite/text.hpp"

namespace bpcite {

struct SegmentedText {
  std::vector<Span> paragraphs;
  std::vector<Span> sentences;
  std::vector<std::size_t> sentence_paragraph;  // paragraph index of each sentence
};

struct SegmentConfig {
  /// Lowercased words (with trailing period) that never end a sentence.
  std::unordered_set<std::string> abbreviations = default_abbreviations();

  static std::unordered_set<std::string> default_abbreviations();
};

/// Paragraphs are maximal runs of non-blank lines; sentences end at . ! or ?
/// followed by whitespace and an uppercase letter or digit, except after a
/// listed abbreviation. All spans are trimmed of surrounding whitespace.
SegmentedText segment(std::string_view body, const SegmentConfig& config = {});

}  // namespace bpcite
