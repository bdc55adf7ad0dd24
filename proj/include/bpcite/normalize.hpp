#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpcite/text.hpp"

namespace bpcite {

/// Ordered normalized terms: lowercase, no punctuation, no stopwords, stemmed.
using TokenSeq = std::vector<std::string>;

struct NormalizerConfig {
  /// "pt" (built-in Portuguese list), "none", or "file" (reads `stopword_file`).
  std::string stopwords = "pt";
  /// "pt-snowball", "none", or "lemma-table" (reads `lemma_table`, "form<TAB>lemma" per line).
  std::string stemmer = "pt-snowball";
  std::filesystem::path stopword_file;
  std::filesystem::path lemma_table;
};

struct RawToken {
  Span span;          // bytes in the source text
  std::string lower;  // lowercased surface form
};

/// Snowball Portuguese stemmer; expects a lowercased word.
std::string stem_portuguese(std::string_view word);

const std::vector<std::string>& portuguese_stopwords();

class Normalizer {
 public:
  /// Throws ConfigError for unknown ids or unreadable files.
  explicit Normalizer(const NormalizerConfig& config = {});

  /// Maximal runs of letters/digits, lowercased, with source spans.
  static std::vector<RawToken> tokenize(std::string_view body);

  TokenSeq normalize(std::string_view body) const;

  /// Normalized form of one lowercased token; empty when it is a stopword.
  std::string term(std::string_view lower) const;

  const std::string& fingerprint() const { return fingerprint_; }

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);

 private:
  struct Blank {};
  explicit Normalizer(Blank) {}
  void finish();

  enum class Stemmer { None, Snowball, LemmaTable };

  std::string stopword_id_;
  std::string stemmer_id_;
  std::unordered_set<std::string> stopwords_;
  std::vector<std::string> custom_stopwords_;  // persisted only for "file"
  Stemmer stemmer_ = Stemmer::Snowball;
  std::map<std::string, std::string> lemmas_;
  std::string fingerprint_;
};

}  // namespace bpcite
