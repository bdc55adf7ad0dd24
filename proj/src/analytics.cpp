#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bpcite/analytics.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

double angular_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw DataError("similarity of vectors with different dimensions");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return 1.0 - std::acos(c) / std::numbers::pi;
}

std::vector<ParagraphSimilarity> paragraph_similarities(const EmbeddingPipeline& pipeline, const Document& doc,
                                                        const Eigen::VectorXd& statement_latent,
                                                        const SegmentedText& seg) {
  std::vector<ParagraphSimilarity> out;
  out.reserve(seg.paragraphs.size());
  for (std::size_t i = 0; i < seg.paragraphs.size(); ++i) {
    const auto text = slice(doc.body, seg.paragraphs[i]);
    out.push_back({doc.id, i, angular_similarity(pipeline.latent(text), statement_latent), text::decode(text).size()});
  }
  return out;
}

std::vector<ParagraphSimilarity> paragraph_similarities(const EmbeddingPipeline& pipeline, const Document& doc,
                                                        const BindingPrecedent& bp, const SegmentConfig& segmentation) {
  return paragraph_similarities(pipeline, doc, pipeline.latent(bp.statement), segment(doc.body, segmentation));
}

double document_score(std::span<const ParagraphSimilarity> sims) {
  if (sims.empty()) throw DataError("document score needs at least one paragraph");
  double best = sims.front().similarity;
  for (const auto& s : sims) best = std::max(best, s.similarity);
  return best;
}

std::vector<ScoredDocument> order_documents(std::vector<ScoredDocument> docs) {
  std::stable_sort(docs.begin(), docs.end(), [](const ScoredDocument& a, const ScoredDocument& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  return docs;
}

std::vector<std::size_t> similarity_histogram(std::span<const double> scores, std::size_t n_bins) {
  if (n_bins == 0) throw ConfigError("histogram needs at least one bin");
  std::vector<std::size_t> bins(n_bins, 0);
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("histogram score outside [0, 1]");
    const auto b = static_cast<std::size_t>(s * static_cast<double>(n_bins));
    ++bins[std::min(b, n_bins - 1)];
  }
  return bins;
}

Clustering cluster_documents(const EmbeddingPipeline& pipeline, std::span<const std::string> bodies, std::size_t k,
                             const NmfOptions& options, std::size_t keywords) {
  std::vector<TokenSeq> tokens;
  tokens.reserve(bodies.size());
  for (const auto& b : bodies) tokens.push_back(pipeline.tokens(b));
  const auto tfidf = TfIdfModel::fit(tokens, 1);
  Clustering c;
  c.model = fit_nmf(tfidf.transform_all(tokens), k, options);
  c.vocabulary = tfidf.terms();
  c.assignment = assign_topics(c.model);
  c.keywords = topic_keywords(c.model, c.vocabulary, keywords);
  return c;
}

bool TimelineFilter::accepts(const CitationRecord& r, const Document& doc) const {
  if (!kinds.empty() && !kinds.count(r.kind)) return false;
  if (rapporteur && doc.rapporteur != *rapporteur) return false;
  if (doc_type && doc.doc_type != *doc_type) return false;
  if (r.kind == CitationKind::Potential && r.confidence < t_c) return false;
  return true;
}

TimelineFilter TimelineFilter::parse(const std::map<std::string, std::string>& fields) {
  TimelineFilter f;
  for (const auto& [key, value] : fields) {
    if (key == "kinds") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
          f.kinds.insert(parse_citation_kind(item));
        } catch (const DataError&) {
          throw ConfigError("unknown citation kind '" + item + "' in filter");
        }
      }
    } else if (key == "rapporteur") {
      f.rapporteur = value;
    } else if (key == "doc_type") {
      f.doc_type = value;
    } else if (key == "tc") {
      std::size_t used = 0;
      try {
        f.t_c = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || !(f.t_c >= 0.0 && f.t_c <= 1.0))
        throw ConfigError("filter tc must be a number in [0, 1]");
    } else {
      throw ConfigError("unknown filter field '" + key + "'");
    }
  }
  return f;
}

std::vector<TimelineBin> timeline_bins(std::span<const CitationRecord> records, std::span<const Document> docs,
                                       const TimelineFilter& filter) {
  std::unordered_map<std::string_view, const Document*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);
  std::map<std::pair<BpId, YearMonth>, TimelineBin> bins;
  for (const auto& r : records) {
    if (!r.month) continue;
    auto it = by_id.find(r.doc_id);
    if (it == by_id.end()) throw DataError("citation record for unknown document " + r.doc_id);
    if (!filter.accepts(r, *it->second)) continue;
    auto& bin = bins[{r.bp, *r.month}];
    bin.bp = r.bp;
    bin.month = *r.month;
    ++bin.total;
    ++(r.kind == CitationKind::Explicit ? bin.explicit_count : bin.potential);
  }
  std::vector<TimelineBin> out;
  out.reserve(bins.size());
  for (auto& [key, bin] : bins) out.push_back(bin);
  return out;
}

std::vector<Span> shared_term_spans(const Normalizer& normalizer, std::string_view body, std::string_view statement,
                                    std::size_t min_length) {
  std::unordered_set<std::string> terms;
  for (auto& t : normalizer.normalize(statement)) terms.insert(std::move(t));
  std::vector<Span> out;
  for (const auto& tok : Normalizer::tokenize(body)) {
    if (text::decode(tok.lower).size() < min_length) continue;
    const auto term = normalizer.term(tok.lower);
    if (!term.empty() && terms.count(term)) out.push_back(tok.span);
  }
  return out;
}

}  // namespace bpcite
