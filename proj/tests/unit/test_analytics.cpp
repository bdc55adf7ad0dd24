#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "bpcite/analytics.hpp"
#include "bpcite/random.hpp"
#include "helpers.hpp"

using namespace bpcite;
using testing_support::make_doc;
using testing_support::small_world;

namespace {

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

TEST(Angular, ReferenceAngles) {
  const Eigen::Vector3d u(1, 2, 3);
  EXPECT_NEAR(angular_similarity(u, u), 1.0, 1e-12);
  EXPECT_NEAR(angular_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 5)), 0.5, 1e-12);
  EXPECT_NEAR(angular_similarity(u, -u), 0.0, 1e-12);
  EXPECT_EQ(angular_similarity(u, Eigen::Vector3d::Zero()), 0.0);
  // 60 degrees.
  EXPECT_NEAR(angular_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, std::sqrt(3.0) / 2)), 1.0 - 1.0 / 3.0,
              1e-12);
}

TEST(Angular, SymmetryAndScaleInvariance) {
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const auto u = random_vector(rng, 6), v = random_vector(rng, 6);
    const double s = angular_similarity(u, v);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, angular_similarity(v, u));
    EXPECT_NEAR(angular_similarity(u * (0.01 + 50 * rng.uniform()), v), s, 1e-12);
    const double hand = 1.0 - std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0)) / std::numbers::pi;
    EXPECT_NEAR(s, hand, 1e-12);
  }
}

TEST(DocumentScore, MaxOfParagraphs) {
  std::vector<ParagraphSimilarity> one{{"d", 0, 0.3, 5}};
  EXPECT_EQ(document_score(one), 0.3);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<ParagraphSimilarity> sims;
    double hand = -1.0;
    for (std::size_t i = 0, n = rng.between(1, 9); i < n; ++i) {
      sims.push_back({"d", i, rng.uniform(), 1});
      hand = std::max(hand, sims.back().similarity);
    }
    EXPECT_EQ(document_score(sims), hand);
  }
  EXPECT_THROW(document_score(std::vector<ParagraphSimilarity>{}), DataError);
}

TEST(OrderDocuments, DescendingWithIdTieBreak) {
  const std::vector<ScoredDocument> sorted{{"a", 0.9}, {"b", 0.5}, {"c", 0.1}};
  EXPECT_EQ(order_documents(sorted), sorted);
  EXPECT_EQ(order_documents({sorted.rbegin(), sorted.rend()}), sorted);
  std::vector<ScoredDocument> ties{{"d", 0.5}, {"b", 0.5}, {"a", 0.7}, {"c", 0.5}};
  const std::vector<ScoredDocument> expected{{"a", 0.7}, {"b", 0.5}, {"c", 0.5}, {"d", 0.5}};
  std::sort(ties.begin(), ties.end(), [](auto& x, auto& y) { return x.doc_id < y.doc_id; });
  do {
    EXPECT_EQ(order_documents(ties), expected);
  } while (std::next_permutation(ties.begin(), ties.end(), [](auto& x, auto& y) { return x.doc_id < y.doc_id; }));
}

TEST(OrderDocuments, IsAPermutation) {
  Rng rng(5);
  std::vector<ScoredDocument> docs;
  for (int i = 0; i < 40; ++i) docs.push_back({"d" + std::to_string(i), double(rng.index(5)) / 4});
  auto out = order_documents(docs);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i - 1].score, out[i].score);
  auto key = [](const ScoredDocument& d) { return std::make_pair(d.doc_id, d.score); };
  std::multiset<std::pair<std::string, double>> a, b;
  for (const auto& d : docs) a.insert(key(d));
  for (const auto& d : out) b.insert(key(d));
  EXPECT_EQ(a, b);
}

TEST(Histogram, Examples) {
  EXPECT_EQ(similarity_histogram(std::vector<double>{1.0, 1.0}, 4), (std::vector<std::size_t>{0, 0, 0, 2}));
  EXPECT_EQ(similarity_histogram(std::vector<double>{}, 3), (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_THROW(similarity_histogram(std::vector<double>{1.2}), DataError);
}

TEST(Histogram, MatchesBruteForceBinning) {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = rng.between(1, 12);
    std::vector<double> scores;
    for (std::size_t i = 0, m = rng.between(0, 200); i < m; ++i) scores.push_back(rng.uniform());
    std::vector<std::size_t> hand(n, 0);
    for (double s : scores)
      for (std::size_t b = 0; b < n; ++b)
        if (double(b) / n <= s && (s < double(b + 1) / n || b + 1 == n)) {
          ++hand[b];
          break;
        }
    const auto bins = similarity_histogram(scores, n);
    EXPECT_EQ(bins, hand);
    std::size_t total = 0;
    for (auto c : bins) total += c;
    EXPECT_EQ(total, scores.size());
  }
}

TEST(Nmf, ExactFactorizationIsRecovered) {
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    const Eigen::Index n = 12, m = 9, k = 3;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, k), h = Eigen::MatrixXd::Zero(k, m);
    for (Eigen::Index i = 0; i < n; ++i) w(i, i % k) = 1.0 + rng.uniform();
    for (Eigen::Index j = 0; j < m; ++j) h(j % k, j) = 1.0 + rng.uniform();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < k; ++j) w(i, j) += 0.1 * rng.uniform();
    const Eigen::MatrixXd x = w * h;
    NmfOptions opts;
    opts.iterations = 5000;
    opts.seed = t;
    const auto model = fit_nmf(x, k, opts);
    EXPECT_LE((x - model.w * model.h).squaredNorm(), 1e-6 * x.squaredNorm());
    EXPECT_LE(model.objective_trace.back(), 1e-6 * x.squaredNorm());
  }
}

TEST(Nmf, TraceIsNonIncreasingAndFactorsNonNegative) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x(15, 11);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform() < 0.4 ? rng.uniform() : 0.0;
    NmfOptions opts;
    opts.iterations = 150;
    opts.seed = t;
    const auto model = fit_nmf(x, 1 + t % 4, opts);
    ASSERT_EQ(model.objective_trace.size(), 150u);
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
      EXPECT_LE(model.objective_trace[i], model.objective_trace[i - 1] * (1 + 1e-12) + 1e-15) << i;
    EXPECT_GE(model.w.minCoeff(), 0.0);
    EXPECT_GE(model.h.minCoeff(), 0.0);
    EXPECT_NEAR(model.objective_trace.back(), (x - model.w * model.h).squaredNorm(), 1e-9 * x.squaredNorm());
    const auto again = fit_nmf(x, 1 + t % 4, opts);
    EXPECT_EQ(again.w, model.w);
    EXPECT_EQ(again.h, model.h);
  }
}

TEST(Nmf, SparseAndDenseInputsAgree) {
  Rng rng(9);
  Eigen::MatrixXd x(8, 6);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
  const SparseMat sx = x.sparseView();
  const auto a = fit_nmf(x, 2), b = fit_nmf(sx, 2);
  EXPECT_TRUE(a.w.isApprox(b.w, 1e-10));
  EXPECT_TRUE(a.h.isApprox(b.h, 1e-10));
}

TEST(Topics, KeywordsAndAssignment) {
  TopicModel m;
  m.k = 2;
  m.h = Eigen::MatrixXd(2, 4);
  m.h << 0.5, 0.0, 0.9, 0.5, 0.0, 1.0, 0.0, 0.2;
  m.w = Eigen::MatrixXd(3, 2);
  m.w << 1, 0, 0, 1, 0.5, 0.5;
  const std::vector<std::string> vocab{"d", "c", "b", "a"};
  const auto kw = topic_keywords(m, vocab, 3);
  ASSERT_EQ(kw.size(), 2u);
  ASSERT_EQ(kw[0].size(), 3u);
  EXPECT_EQ(kw[0][0].term, "b");
  EXPECT_EQ(kw[0][1].term, "a");  // tie at 0.5 broken by term
  EXPECT_EQ(kw[0][2].term, "d");
  EXPECT_EQ(topic_keywords(m, vocab, 50)[1].size(), 4u);
  EXPECT_EQ(assign_topics(m), (std::vector<std::size_t>{0, 1, 0}));
}

TEST(Topics, AssignmentMatchesBruteForceArgmax) {
  Rng rng(10);
  TopicModel m;
  m.k = 4;
  m.w = Eigen::MatrixXd(30, 4);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) m.w(i, j) = double(rng.index(4));
  const auto a = assign_topics(m);
  for (Eigen::Index i = 0; i < 30; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < 4; ++j)
      if (m.w(i, j) > m.w(i, best)) best = j;
    EXPECT_EQ(a[i], best);
  }
}

TEST(Topics, DisjointVocabulariesGiveDisjointKeywords) {
  const auto& w = small_world();
  std::vector<std::string> bodies;
  for (int i = 0; i < 6; ++i) {
    bodies.push_back("alfa beta gama delta alfa beta. gama alfa delta.");
    bodies.push_back("zeta teta kapa lambda zeta. teta kapa lambda zeta.");
  }
  NmfOptions opts;
  opts.iterations = 500;
  const auto c = cluster_documents(w.pipeline, bodies, 2, opts, 4);
  ASSERT_EQ(c.keywords.size(), 2u);
  std::set<std::string> a, b;
  for (const auto& k : c.keywords[0]) a.insert(k.term);
  for (const auto& k : c.keywords[1]) b.insert(k.term);
  for (const auto& t : a) EXPECT_FALSE(b.count(t)) << t;
  for (std::size_t i = 0; i < bodies.size(); ++i) EXPECT_EQ(c.assignment[i], c.assignment[i % 2]);
  EXPECT_NE(c.assignment[0], c.assignment[1]);
}

TEST(Topics, SingleTopicRanksByTfIdfMass) {
  const auto& w = small_world();
  const std::vector<std::string> bodies = {"alfa alfa alfa beta", "alfa alfa gama", "alfa beta"};
  NmfOptions opts;
  opts.iterations = 300;
  const auto c = cluster_documents(w.pipeline, bodies, 1, opts, 10);
  ASSERT_EQ(c.keywords[0].size(), 3u);
  EXPECT_EQ(c.keywords[0][0].term, w.pipeline.normalizer().term("alfa"));
}

TEST(ParagraphSimilarity, HandChainedComputation) {
  const auto& w = small_world();
  const auto& bp = w.corpus.precedents.front();
  const auto doc = make_doc("p", "Primeiro parágrafo sobre o processo.\n\n" + bp.statement + "\n\n!!!");
  const auto sims = paragraph_similarities(w.pipeline, doc, bp);
  const auto seg = segment(doc.body);
  ASSERT_EQ(sims.size(), 3u);
  const auto statement = w.pipeline.latent(bp.statement);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto para = std::string(slice(doc.body, seg.paragraphs[i]));
    const Eigen::VectorXd tf = Eigen::VectorXd(w.pipeline.tfidf_vector(para));
    const Eigen::VectorXd z = w.pipeline.svd().components() * tf;
    const double hand = z.norm() == 0 || statement.norm() == 0
                            ? 0.0
                            : 1.0 - std::acos(std::clamp(z.dot(statement) / (z.norm() * statement.norm()), -1.0,
                                                         1.0)) / std::numbers::pi;
    EXPECT_NEAR(sims[i].similarity, hand, 1e-12);
    EXPECT_EQ(sims[i].paragraph_index, i);
  }
  EXPECT_EQ(sims[2].similarity, 0.0);
  EXPECT_EQ(sims[2].paragraph_length, 3u);
  EXPECT_NEAR(sims[1].similarity, 1.0, 1e-12);
  EXPECT_EQ(document_score(sims), sims[1].similarity);
}

TEST(Timeline, SingleMonthExample) {
  std::vector<Document> docs;
  std::vector<CitationRecord> recs;
  for (int i = 0; i < 5; ++i) {
    docs.push_back(make_doc("d" + std::to_string(i), "x", {}, Date{2015, 3, 10}));
    recs.push_back({docs.back().id, 4, i < 3 ? CitationKind::Explicit : CitationKind::Potential, i < 3 ? 1.0 : 0.97,
                    YearMonth{2015, 3}});
  }
  const auto bins = timeline_bins(recs, docs, {});
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_EQ(bins[0].total, 5u);
  EXPECT_EQ(bins[0].explicit_count, 3u);
  EXPECT_EQ(bins[0].potential, 2u);
}

TEST(Timeline, MatchesLinearScanOracle) {
  Rng rng(12);
  std::vector<Document> docs;
  std::vector<CitationRecord> recs;
  const std::vector<std::string> rapporteurs{"Min. A", "Min. B", std::string(kUnknownJustice)};
  const std::vector<std::string> types{"Rcl", "Pet", "Inq"};
  for (int i = 0; i < 400; ++i) {
    auto d = make_doc("d" + std::to_string(i), "x");
    d.rapporteur = rapporteurs[rng.index(3)];
    d.doc_type = types[rng.index(3)];
    if (rng.uniform() > 0.1) d.date = Date{2008 + int(rng.index(4)), 1 + int(rng.index(12)), 1};
    docs.push_back(d);
    const bool expl = rng.uniform() < 0.5;
    recs.push_back({d.id, BpId(4 + 10 * int(rng.index(3))), expl ? CitationKind::Explicit : CitationKind::Potential,
                    expl ? 1.0 : 0.9 + 0.1 * rng.uniform(),
                    d.date ? std::optional(month_of(*d.date)) : std::nullopt});
  }
  std::vector<TimelineFilter> filters(6);
  filters[1].kinds = {CitationKind::Potential};
  filters[2].rapporteur = "Min. B";
  filters[3].doc_type = "Pet";
  filters[4].t_c = 0.95;
  filters[5].t_c = 0.97;
  filters[5].kinds = {CitationKind::Explicit, CitationKind::Potential};
  filters[5].doc_type = "Rcl";
  for (const auto& f : filters) {
    std::map<std::pair<BpId, YearMonth>, std::array<std::size_t, 3>> hand;
    std::size_t dated = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      const auto& d = docs[i];
      if (!r.month) continue;
      if (!f.kinds.empty() && !f.kinds.count(r.kind)) continue;
      if (f.rapporteur && d.rapporteur != *f.rapporteur) continue;
      if (f.doc_type && d.doc_type != *f.doc_type) continue;
      if (r.kind == CitationKind::Potential && r.confidence < f.t_c) continue;
      auto& c = hand[{r.bp, *r.month}];
      ++c[0];
      ++c[r.kind == CitationKind::Explicit ? 1 : 2];
      ++dated;
    }
    const auto bins = timeline_bins(recs, docs, f);
    ASSERT_EQ(bins.size(), hand.size());
    std::size_t i = 0, total = 0;
    for (const auto& [key, c] : hand) {
      EXPECT_EQ(bins[i].bp, key.first);
      EXPECT_EQ(bins[i].month, key.second);
      EXPECT_EQ(bins[i].total, c[0]);
      EXPECT_EQ(bins[i].explicit_count, c[1]);
      EXPECT_EQ(bins[i].potential, c[2]);
      EXPECT_EQ(bins[i].total, bins[i].explicit_count + bins[i].potential);
      total += bins[i].total;
      ++i;
    }
    EXPECT_EQ(total, dated);
  }
}

TEST(Timeline, RaisingThresholdNeverAddsPotential) {
  Rng rng(13);
  std::vector<Document> docs;
  std::vector<CitationRecord> recs;
  for (int i = 0; i < 200; ++i) {
    docs.push_back(make_doc("d" + std::to_string(i), "x", {}, Date{2010, 1 + int(rng.index(12)), 2}));
    recs.push_back({docs.back().id, 4, CitationKind::Potential, rng.uniform(), month_of(*docs.back().date)});
  }
  std::optional<std::map<YearMonth, std::size_t>> prev;
  for (double t : {0.0, 0.2, 0.5, 0.8, 0.95, 1.0}) {
    TimelineFilter f;
    f.t_c = t;
    std::map<YearMonth, std::size_t> now;
    for (const auto& b : timeline_bins(recs, docs, f)) now[b.month] = b.potential;
    if (prev)
      for (const auto& [m, n] : now) {
        ASSERT_TRUE(prev->count(m));
        EXPECT_LE(n, prev->at(m));
      }
    prev = now;
  }
}

TEST(Timeline, FilterParsing) {
  const auto f = TimelineFilter::parse({{"kinds", "potential"}, {"tc", "0.9"}, {"doc_type", "Rcl"}});
  EXPECT_EQ(f.kinds, (std::set<CitationKind>{CitationKind::Potential}));
  EXPECT_DOUBLE_EQ(f.t_c, 0.9);
  EXPECT_EQ(f.doc_type, "Rcl");
  EXPECT_THROW(TimelineFilter::parse({{"color", "red"}}), ConfigError);
  EXPECT_THROW(TimelineFilter::parse({{"tc", "2"}}), ConfigError);
  EXPECT_THROW(TimelineFilter::parse({{"kinds", "implicit"}}), ConfigError);
}

TEST(SharedTerms, HighlightsLongSharedTerms) {
  const Normalizer n;
  const std::string body = "Os servidores públicos e a lei; o servidor recebe.";
  const auto spans = shared_term_spans(n, body, "Servidor público tem direito.");
  std::vector<std::string> words;
  for (const auto& s : spans) words.emplace_back(slice(body, s));
  EXPECT_EQ(words, (std::vector<std::string>{"servidores", "públicos", "servidor"}));
}
