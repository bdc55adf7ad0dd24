#include <fstream>

#include <gtest/gtest.h>

#include "bpcite/citations.hpp"
#include "bpcite/normalize.hpp"
#include "bpcite/random.hpp"
#include "bpcite/segment.hpp"
#include "bpcite/text.hpp"

using namespace bpcite;

TEST(Text, FoldsCaseAndDiacritics) {
  EXPECT_EQ(text::fold("SÚMULA Vinculante").text, "sumula vinculante");
  EXPECT_EQ(text::lowercase("ÇÃO Ação"), "ção ação");
}

TEST(Text, Fnv1aKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(text::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(text::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(text::fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Citations, DetectsPlainCitation) {
  const std::string body = "nos termos da Súmula Vinculante 14 do STF";
  const auto m = CitationPatterns::defaults().detect(body);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].bp, 14);
  EXPECT_EQ(slice(body, m[0].span), "Súmula Vinculante 14");
}

TEST(Citations, UppercaseWithoutAccentsAndOrdinal) {
  const std::string body = "conforme SUMULA VINCULANTE N. 37.";
  const auto m = CitationPatterns::defaults().detect(body);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].bp, 37);
  EXPECT_EQ(slice(body, m[0].span), "SUMULA VINCULANTE N. 37");
}

TEST(Citations, AlternativePhrasingIsNotDetected) {
  EXPECT_TRUE(CitationPatterns::defaults().detect("verbete vinculante nº 10 da súmula").empty());
}

TEST(Citations, StripRemovesEveryCitation) {
  const auto p = CitationPatterns::defaults();
  const std::string one = "aplica-se a súmula vinculante nº 4 ao caso";
  const auto s1 = p.strip(one);
  EXPECT_TRUE(p.detect(s1).empty());
  EXPECT_EQ(s1.find("4"), std::string::npos);
  EXPECT_EQ(p.strip("sem citações aqui"), "sem citações aqui");
  const std::string two = "Súmula Vinculante 10 e Súmula Vinculante nº 26";
  EXPECT_EQ(p.detect(two).size(), 2u);
  const auto s2 = p.strip(two);
  EXPECT_TRUE(p.detect(s2).empty());
  EXPECT_EQ(p.strip(s2), s2);
}

TEST(Citations, StripIsIdempotentOnRandomText) {
  const auto p = CitationPatterns::defaults();
  const std::vector<std::string> pieces = {"súmula", "vinculante", "sumula", "nº", "n.", "14", "3", " ", "VINCULANTE",
                                           "x",      "º",          ".",      "10"};
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const auto len = rng.between(1, 14);
    for (std::size_t i = 0; i < len; ++i) s += pieces[rng.index(pieces.size())] + (rng.uniform() < 0.6 ? " " : "");
    const auto once = p.strip(s);
    EXPECT_TRUE(p.detect(once).empty()) << s;
    EXPECT_EQ(p.strip(once), once) << s;
  }
}

TEST(Citations, CustomPatternList) {
  const auto p = CitationPatterns::from_lines({R"(verbete vinculante n\S*\s*(\d+))"});
  const auto m = p.detect("o verbete vinculante nº 10 da súmula");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].bp, 10);
  EXPECT_THROW(CitationPatterns::from_lines({"("}), ConfigError);
}

TEST(Normalize, StemsAndDropsStopwords) {
  const Normalizer n;
  EXPECT_EQ(n.normalize("A Corte decidiu."), (TokenSeq{"cort", "decid"}));
  EXPECT_TRUE(n.normalize("").empty());
  EXPECT_TRUE(n.normalize("!!! ???").empty());
}

// Reference stems produced by the Python `snowballstemmer` package.
TEST(Normalize, SnowballReferenceWords) {
  std::ifstream in(std::string(BPCITE_TEST_DATA) + "/snowball_pt.tsv");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    EXPECT_EQ(stem_portuguese(line.substr(0, tab)), line.substr(tab + 1)) << line;
    ++n;
  }
  EXPECT_GT(n, 100u);
}

TEST(Normalize, DeterministicAndNoStopwords) {
  const Normalizer n;
  const std::string body = "O Tribunal, em sessão plenária, negou provimento ao recurso e de ofício.";
  const auto a = n.normalize(body);
  EXPECT_EQ(a, n.normalize(body));
  for (const auto& t : a) {
    EXPECT_EQ(t, text::lowercase(t));
    EXPECT_NE(t, "o");
    EXPECT_NE(t, "em");
    EXPECT_NE(t, "de");
  }
}

TEST(Normalize, NoOpConfiguration) {
  NormalizerConfig cfg;
  cfg.stopwords = "none";
  cfg.stemmer = "none";
  const Normalizer n(cfg);
  EXPECT_EQ(n.normalize("A Corte decidiu."), (TokenSeq{"a", "corte", "decidiu"}));
  cfg.stemmer = "porter";
  EXPECT_THROW(Normalizer{cfg}, ConfigError);
}

TEST(Normalize, JsonRoundTripKeepsFingerprint) {
  const Normalizer n;
  const auto back = Normalizer::from_json(n.to_json());
  EXPECT_EQ(back.fingerprint(), n.fingerprint());
  EXPECT_EQ(back.normalize("As decisões foram publicadas"), n.normalize("As decisões foram publicadas"));
}

TEST(Segment, ParagraphsAndSentences) {
  const std::string body = "Um. Dois.\n\nTrês.";
  const auto s = segment(body);
  ASSERT_EQ(s.paragraphs.size(), 2u);
  ASSERT_EQ(s.sentences.size(), 3u);
  EXPECT_EQ(slice(body, s.sentences[0]), "Um.");
  EXPECT_EQ(slice(body, s.sentences[1]), "Dois.");
  EXPECT_EQ(slice(body, s.sentences[2]), "Três.");
  EXPECT_EQ(s.sentence_paragraph, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(Segment, NoBlankLinesIsOneParagraph) {
  EXPECT_EQ(segment("linha um.\nlinha dois.\nlinha três.").paragraphs.size(), 1u);
}

TEST(Segment, AbbreviationDoesNotSplit) {
  const std::string body = "O art. 5 vale. Fim.";
  const auto s = segment(body);
  ASSERT_EQ(s.sentences.size(), 2u);
  EXPECT_EQ(slice(body, s.sentences[0]), "O art. 5 vale.");
}

TEST(Segment, SpansAreSortedNestedAndCoverText) {
  Rng rng(17);
  const std::vector<std::string> parts = {"Palavra", "outra.", "Fim!", "art.", "\n", "\n\n", "  ", "Sim?", "x"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string body;
    for (std::size_t i = 0, n = rng.between(0, 20); i < n; ++i) body += parts[rng.index(parts.size())] + " ";
    const auto s = segment(body);
    for (std::size_t i = 0; i < s.sentences.size(); ++i) {
      if (i) EXPECT_LE(s.sentences[i - 1].end, s.sentences[i].begin);
      const auto& para = s.paragraphs.at(s.sentence_paragraph[i]);
      EXPECT_TRUE(para.contains(s.sentences[i]));
    }
    // Everything outside the paragraph spans is whitespace.
    std::size_t pos = 0;
    for (const auto& para : s.paragraphs) {
      EXPECT_LE(pos, para.begin);
      EXPECT_TRUE(text::is_blank(std::string_view(body).substr(pos, para.begin - pos)));
      pos = para.end;
    }
    EXPECT_TRUE(text::is_blank(std::string_view(body).substr(pos)));
  }
}
