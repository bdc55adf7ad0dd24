#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "bpcite/citation_engine.hpp"
#include "bpcite/random.hpp"
#include "helpers.hpp"

using namespace bpcite;
using testing_support::make_doc;
using testing_support::small_world;

namespace {

const std::vector<BpId> kClasses{4, 10, 14};

}  // namespace

TEST(CitationRule, PotentialAboveThreshold) {
  const auto doc = make_doc("d", "x", {}, Date{2012, 5, 17});
  InferenceConfig cfg;
  const auto r = apply_citation_rule(doc, kClasses, Eigen::Vector3d(0.96, 0.03, 0.01), cfg);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->bp, 4);
  EXPECT_EQ(r->kind, CitationKind::Potential);
  EXPECT_DOUBLE_EQ(r->confidence, 0.96);
  EXPECT_EQ(r->month, (YearMonth{2012, 5}));
  EXPECT_FALSE(apply_citation_rule(doc, kClasses, Eigen::Vector3d(0.94, 0.05, 0.01), cfg));
}

TEST(CitationRule, ThresholdIsInclusive) {
  const auto doc = make_doc("d", "x");
  InferenceConfig cfg;
  cfg.t_c = 0.5;
  const auto r = apply_citation_rule(doc, kClasses, Eigen::Vector3d(0.25, 0.5, 0.25), cfg);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->bp, 10);
  EXPECT_FALSE(r->month);
}

TEST(CitationRule, ExplicitLabelWinsRegardlessOfThreshold) {
  const auto doc = make_doc("d", "x", {14});
  InferenceConfig cfg;
  cfg.t_c = 1.0;
  const auto r = apply_citation_rule(doc, kClasses, Eigen::Vector3d(0.2, 0.3, 0.5), cfg);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, CitationKind::Explicit);
  EXPECT_EQ(r->bp, 14);
  EXPECT_DOUBLE_EQ(r->confidence, 1.0);
}

TEST(CitationRule, ScopeExcludesArgmax) {
  InferenceConfig cfg;
  cfg.t_c = 0.1;
  cfg.bp_scope = {10, 14};
  EXPECT_FALSE(apply_citation_rule(make_doc("d", "x"), kClasses, Eigen::Vector3d(0.9, 0.05, 0.05), cfg));
  EXPECT_TRUE(out_of_scope(make_doc("d", "x", {4}), cfg.bp_scope));
  EXPECT_FALSE(out_of_scope(make_doc("d", "x", {10}), cfg.bp_scope));
}

TEST(CitationRule, ConfigValidation) {
  InferenceConfig cfg;
  cfg.t_c = 1.0 + 1e-9;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.t_c = -1e-9;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.t_c = 0.0;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(BatchApply, ThresholdZeroCoversEveryUnlabeledDocument) {
  Rng rng(1);
  std::vector<Document> docs;
  Eigen::MatrixXd p(20, 3);
  for (int i = 0; i < 20; ++i) {
    docs.push_back(make_doc("d" + std::to_string(i), "x"));
    p.row(i) = normalize_simplex(Eigen::Vector3d(rng.uniform() + 1e-3, rng.uniform(), rng.uniform())).transpose();
  }
  InferenceConfig cfg;
  cfg.t_c = 0.0;
  const auto r = batch_apply(docs, kClasses, p, cfg);
  EXPECT_EQ(r.records.size(), 20u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.kind, CitationKind::Potential);
}

TEST(BatchApply, PotentialSetsAreNestedInThreshold) {
  Rng rng(2);
  std::vector<Document> docs;
  Eigen::MatrixXd p(300, 3);
  for (int i = 0; i < 300; ++i) {
    docs.push_back(make_doc("d" + std::to_string(i), "x", i % 7 == 0 ? std::vector<BpId>{10} : std::vector<BpId>{}));
    Eigen::Vector3d raw(std::pow(rng.uniform(), 4), rng.uniform(), std::pow(rng.uniform(), 0.2));
    p.row(i) = normalize_simplex(raw).transpose();
  }
  auto potential = [&](double t) {
    InferenceConfig cfg;
    cfg.t_c = t;
    std::set<std::pair<BpId, std::string>> out;
    std::set<std::pair<BpId, std::string>> expl;
    for (const auto& r : batch_apply(docs, kClasses, p, cfg).records)
      (r.kind == CitationKind::Potential ? out : expl).insert({r.bp, r.doc_id});
    return std::make_pair(out, expl);
  };
  const std::vector<double> ts{0.0, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0};
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const auto [lo, lo_expl] = potential(ts[i - 1]);
    const auto [hi, hi_expl] = potential(ts[i]);
    for (const auto& rec : hi) EXPECT_TRUE(lo.count(rec)) << ts[i];
    EXPECT_EQ(lo_expl, hi_expl);
  }
}

TEST(BatchInfer, EqualsPerDocumentInference) {
  const auto& w = small_world();
  InferenceConfig cfg;
  cfg.t_c = 0.6;
  cfg.bp_scope = {w.classifier.classes().begin(), w.classifier.classes().end()};
  const auto batch = batch_infer(w.pipeline, w.classifier, w.corpus.documents, cfg);
  std::vector<CitationRecord> manual;
  std::size_t errors = 0;
  for (const auto& d : w.corpus.documents) {
    try {
      if (auto r = infer_document(w.pipeline, w.classifier, d, cfg)) manual.push_back(*r);
    } catch (const ConfigError&) {
      ++errors;
    }
  }
  EXPECT_EQ(batch.records, manual);
  EXPECT_EQ(batch.errors.size(), errors);
  EXPECT_GT(errors, 0u);
}

TEST(BatchInfer, MismatchedPipelineIsAModelError) {
  const auto& w = small_world();
  auto clf = w.classifier;
  clf.embedding_fingerprint = "other";
  EXPECT_THROW(infer_document(w.pipeline, clf, w.corpus.documents.front(), {}), ModelError);
  EXPECT_THROW(batch_infer(w.pipeline, clf, w.corpus.documents, {}), ModelError);
}

TEST(BuildIndex, LabelRecordsPlusPotential) {
  std::vector<Document> docs = {make_doc("b", "x", {4, 10}, Date{2010, 1, 1}), make_doc("a", "x"),
                                make_doc("c", "x", {99})};
  const std::vector<CitationRecord> inferred = {{"b", 4, CitationKind::Explicit, 1.0, YearMonth{2010, 1}},
                                                {"a", 14, CitationKind::Potential, 0.97, std::nullopt}};
  const auto idx = build_index(docs, inferred, {4, 10, 14});
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx[0].doc_id, "a");
  EXPECT_EQ(idx[1].doc_id, "b");
  EXPECT_EQ(idx[1].bp, 4);
  EXPECT_EQ(idx[2].bp, 10);
  EXPECT_EQ(idx[2].kind, CitationKind::Explicit);
  EXPECT_EQ(idx[2].month, (YearMonth{2010, 1}));
}

TEST(CitationIo, JsonlRoundTrip) {
  const std::vector<CitationRecord> recs = {{"a", 4, CitationKind::Explicit, 1.0, YearMonth{2011, 2}},
                                            {"b", 10, CitationKind::Potential, 0.951234567891, std::nullopt}};
  std::stringstream ss;
  write_citations(ss, recs);
  EXPECT_EQ(read_citations(ss), recs);
  EXPECT_EQ(to_json(recs[1]).at("month"), nullptr);
  EXPECT_EQ(to_json(recs[0]).at("bp_id"), 4);
  EXPECT_THROW(parse_citation_kind("maybe"), DataError);
}
