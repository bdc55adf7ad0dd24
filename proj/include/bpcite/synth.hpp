#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bpcite/corpus.hpp"

namespace bpcite {

/// Knobs of the synthetic court-decision generator.
struct SynthConfig {
  std::size_t classes = 10;
  std::size_t docs_per_class = 300;
  /// Fraction of each class vocabulary shared with the next class.
  double overlap = 0.3;
  std::size_t class_vocabulary = 60;
  std::size_t common_vocabulary = 500;
  /// Probability that a word of a topical / filler sentence comes from the class vocabulary.
  double topical_rate = 0.35;
  double filler_rate = 0.02;
  /// Probability that a sentence is topical.
  double topical_sentences = 0.4;
  std::size_t multi_label = 30;
  std::size_t duplicates = 20;
  std::size_t unlabeled = 400;
  /// Labeled documents citing a precedent outside the class set.
  std::size_t out_of_scope = 20;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<BindingPrecedent> precedents;
  std::vector<Document> documents;
  std::vector<BpId> class_ids;
  std::vector<std::vector<std::string>> class_words;  // aligned with class_ids
};

SynthCorpus generate_corpus(const SynthConfig& config);

/// Writes documents.jsonl and precedents.jsonl into `dir`.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace bpcite
