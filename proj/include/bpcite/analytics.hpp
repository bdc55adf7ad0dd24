#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpcite/citation_engine.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/embedding.hpp"
#include "bpcite/segment.hpp"

namespace bpcite {

/// 1 - arccos(cos)/pi, in [0, 1]; 0 when either vector is zero.
double angular_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct ParagraphSimilarity {
  std::string doc_id;
  std::size_t paragraph_index = 0;
  double similarity = 0.0;
  std::size_t paragraph_length = 0;  // code points
};

/// Compares unstandardized projections of each paragraph and of the statement.
std::vector<ParagraphSimilarity> paragraph_similarities(const EmbeddingPipeline& pipeline, const Document& doc,
                                                        const Eigen::VectorXd& statement_latent,
                                                        const SegmentedText& seg);
std::vector<ParagraphSimilarity> paragraph_similarities(const EmbeddingPipeline& pipeline, const Document& doc,
                                                        const BindingPrecedent& bp,
                                                        const SegmentConfig& segmentation = {});

/// Maximum paragraph similarity; DataError when empty.
double document_score(std::span<const ParagraphSimilarity> sims);

struct ScoredDocument {
  std::string doc_id;
  double score = 0.0;
  bool operator==(const ScoredDocument&) const = default;
};

/// Descending score, ties by ascending doc_id.
std::vector<ScoredDocument> order_documents(std::vector<ScoredDocument> docs);

/// Equal-width bins over [0, 1]; the last bin includes 1.0.
std::vector<std::size_t> similarity_histogram(std::span<const double> scores, std::size_t n_bins = 10);

// ---------------------------------------------------------------------------
// Topics

struct TopicModel {
  Eigen::MatrixXd w;  // docs x k
  Eigen::MatrixXd h;  // k x terms
  std::size_t k = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> objective_trace;  // |X - WH|_F^2 after each iteration
};

struct NmfOptions {
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
  /// Stop early once the relative objective decrease falls below this (0 disables).
  double tolerance = 0.0;
};

/// Multiplicative Frobenius updates with eps = 1e-12 in the denominators.
TopicModel fit_nmf(const SparseMat& x, std::size_t k, const NmfOptions& options = {});
TopicModel fit_nmf(const Eigen::MatrixXd& x, std::size_t k, const NmfOptions& options = {});

struct Keyword {
  std::string term;
  double weight = 0.0;
};

/// Top-m terms per topic by H entry, ties by term.
std::vector<std::vector<Keyword>> topic_keywords(const TopicModel& model, std::span<const std::string> vocabulary,
                                                 std::size_t m = 10);

/// Argmax over W rows; ties go to the lower topic.
std::vector<std::size_t> assign_topics(const TopicModel& model);

struct Clustering {
  TopicModel model;
  std::vector<std::string> vocabulary;
  std::vector<std::size_t> assignment;
  std::vector<std::vector<Keyword>> keywords;
};

/// TF-IDF refit on the subset (min_df 1), NMF with k topics, keywords and assignment.
Clustering cluster_documents(const EmbeddingPipeline& pipeline, std::span<const std::string> bodies, std::size_t k,
                             const NmfOptions& options = {}, std::size_t keywords = 10);

// ---------------------------------------------------------------------------
// Timeline

struct TimelineFilter {
  std::set<CitationKind> kinds;  // empty = both
  std::optional<std::string> rapporteur;
  std::optional<std::string> doc_type;
  double t_c = 0.0;

  bool accepts(const CitationRecord& r, const Document& doc) const;

  /// Keys: kinds (comma list), rapporteur, doc_type, tc. Unknown keys throw ConfigError.
  static TimelineFilter parse(const std::map<std::string, std::string>& fields);
};

struct TimelineBin {
  BpId bp = 0;
  YearMonth month;
  std::size_t total = 0;
  std::size_t explicit_count = 0;
  std::size_t potential = 0;
  bool operator==(const TimelineBin&) const = default;
};

/// Counts per (bp, month) of filtered records with a month, sorted by bp then month.
std::vector<TimelineBin> timeline_bins(std::span<const CitationRecord> records, std::span<const Document> docs,
                                       const TimelineFilter& filter);

// ---------------------------------------------------------------------------
// Shared vocabulary highlighting

/// Body tokens with at least `min_length` code points whose normalized term
/// also occurs in `statement`.
std::vector<Span> shared_term_spans(const Normalizer& normalizer, std::string_view body, std::string_view statement,
                                    std::size_t min_length = 4);

}  // namespace bpcite
