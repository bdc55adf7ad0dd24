#pragma once

#include <filesystem>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "bpcite/corpus.hpp"
#include "bpcite/text.hpp"

namespace bpcite {

struct CitationMatch {
  BpId bp = 0;
  Span span;  // byte range in the original text
  friend bool operator==(const CitationMatch&, const CitationMatch&) = default;
};

/// Explicit-citation detector. Patterns are ECMAScript regexes evaluated
/// against a lowercased, diacritic-free fold of the text; capture group 1 must
/// hold the precedent number.
class CitationPatterns {
 public:
  /// "súmula vinculante" + optional ordinal marker + number. The phrasing
  /// "verbete vinculante ... da súmula" is intentionally not covered.
  static CitationPatterns defaults();
  static CitationPatterns from_lines(std::vector<std::string> patterns);
  static CitationPatterns load(const std::filesystem::path& path);

  /// Non-overlapping matches sorted by start. Matches whose captured number is
  /// not a positive integer are dropped with a warning.
  std::vector<CitationMatch> detect(std::string_view body) const;

  /// Blanks every detected span with one space, repeating until nothing is
  /// detected, so detect(strip(x)) is always empty.
  std::string strip(std::string_view body) const;

  const std::vector<std::string>& sources() const { return sources_; }

 private:
  std::vector<std::string> sources_;
  std::vector<std::shared_ptr<const std::regex>> compiled_;
};

}  // namespace bpcite
