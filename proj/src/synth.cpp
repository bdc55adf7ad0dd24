#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "bpcite/errors.hpp"
#include "bpcite/normalize.hpp"
#include "bpcite/random.hpp"
#include "bpcite/synth.hpp"

namespace bpcite {

namespace {

constexpr BpId kClassIds[] = {4, 10, 11, 13, 14, 17, 24, 26, 31, 37};

const char* const kOnsets[] = {"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "br", "cr", "pr", "tr", "ch", "lh", "nh"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "a", "e", "o", "ã", "é", "ó", "í"};
const char* const kCodas[] = {"", "", "", "s", "r", "l", "n"};

const char* const kRapporteurs[] = {"Min. Ayres Bastos", "Min. Carmem Luz", "Min. Dias Toledo", "Min. Edson Faria",
                                    "Min. Gilda Moura",  "Min. Luiz Prado",  "Min. Marco Aurino", "Min. Rosa Weber Lins",
                                    "Min. Celso Duarte", "Min. Teori Alves", "Min. Nunes Reis"};
const char* const kLabeledTypes[] = {"Rcl", "Rcl", "Rcl", "Rcl", "ARE", "RE"};
const char* const kOtherTypes[] = {"HC", "Inq", "Pet", "RE", "ARE", "Rcl"};

const char* const kCitationForms[] = {
    "Súmula Vinculante {}",     "Súmula Vinculante nº {}", "súmula vinculante n. {}", "SÚMULA VINCULANTE Nº {}",
    "Sumula Vinculante no {}", "Súmula Vinculante n.º {}", "súmula vinculante número {}", "Súmula Vinculante {}"};
const char* const kCitationFrames[] = {"Nos termos da {}, o pedido procede.", "A reclamação aponta ofensa à {}.",
                                       "Alega-se contrariedade à {} nesta hipótese.",
                                       "Conforme a {}, aplica-se o entendimento."};

std::string format_one(const char* pattern, const std::string& value) {
  std::string out(pattern);
  const auto pos = out.find("{}");
  return out.replace(pos, 2, value);
}

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    const auto& stops = portuguese_stopwords();
    stopwords_.insert(stops.begin(), stops.end());
  }

  SynthCorpus run() {
    if (cfg_.classes == 0) throw ConfigError("synthetic corpus needs at least one class");
    if (!(cfg_.overlap >= 0.0 && cfg_.overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
    SynthCorpus out;
    for (std::size_t c = 0; c < cfg_.classes; ++c)
      out.class_ids.push_back(c < std::size(kClassIds) ? kClassIds[c] : static_cast<BpId>(38 + c - std::size(kClassIds)));

    // Pools: per-class own words, shared with the neighbouring class as configured.
    std::vector<std::vector<std::string>> pools;
    for (std::size_t c = 0; c < cfg_.classes; ++c) pools.push_back(fresh_words(cfg_.class_vocabulary));
    common_ = fresh_words(cfg_.common_vocabulary);
    const auto shared = static_cast<std::size_t>(cfg_.overlap * static_cast<double>(cfg_.class_vocabulary) + 0.5);
    for (std::size_t c = 0; c < cfg_.classes; ++c) {
      std::vector<std::string> words(pools[c].begin(), pools[c].end() - static_cast<std::ptrdiff_t>(shared));
      if (cfg_.classes > 1) {
        const auto& next = pools[(c + 1) % cfg_.classes];
        words.insert(words.end(), next.begin(), next.begin() + static_cast<std::ptrdiff_t>(shared));
      }
      out.class_words.push_back(std::move(words));
    }
    words_ = &out.class_words;

    const BpId max_id = *std::max_element(out.class_ids.begin(), out.class_ids.end());
    for (BpId id = 1; id <= max_id + 3; ++id) {
      BindingPrecedent bp;
      bp.id = id;
      const auto cls = std::find(out.class_ids.begin(), out.class_ids.end(), id);
      if (cls != out.class_ids.end()) {
        const auto c = static_cast<std::size_t>(cls - out.class_ids.begin());
        bp.statement = sentence(c, 0.6) + " " + sentence(c, 0.6);
      } else {
        bp.statement = sentence(std::nullopt, 0.0);
      }
      bp.published = Date{2007 + static_cast<int>(rng_.index(10)), 1 + static_cast<int>(rng_.index(12)),
                          1 + static_cast<int>(rng_.index(28))};
      if (id % 7 == 0) bp.published.reset();
      out.precedents.push_back(std::move(bp));
    }
    const auto statement_of = [&](BpId id) -> const std::string& { return out.precedents[static_cast<std::size_t>(id - 1)].statement; };
    std::vector<BpId> outside;
    for (BpId id = 1; id <= max_id + 3; ++id)
      if (std::find(out.class_ids.begin(), out.class_ids.end(), id) == out.class_ids.end()) outside.push_back(id);

    for (std::size_t c = 0; c < cfg_.classes; ++c) {
      for (std::size_t i = 0; i < cfg_.docs_per_class; ++i) {
        const BpId bp = out.class_ids[c];
        auto doc = base_document(kLabeledTypes);
        doc.body = body({c}, {bp}, rng_.uniform() < 0.15 ? &statement_of(bp) : nullptr);
        doc.explicit_bps = {bp};
        out.documents.push_back(std::move(doc));
      }
    }
    for (std::size_t i = 0; i < cfg_.multi_label && cfg_.classes > 1; ++i) {
      const std::size_t a = rng_.index(cfg_.classes);
      const std::size_t b = (a + 1 + rng_.index(cfg_.classes - 1)) % cfg_.classes;
      auto doc = base_document(kLabeledTypes);
      doc.body = body({a, b}, {out.class_ids[a], out.class_ids[b]}, nullptr);
      doc.explicit_bps = {out.class_ids[a], out.class_ids[b]};
      std::sort(doc.explicit_bps.begin(), doc.explicit_bps.end());
      out.documents.push_back(std::move(doc));
    }
    for (std::size_t i = 0; i < cfg_.out_of_scope && !outside.empty(); ++i) {
      const BpId bp = outside[rng_.index(outside.size())];
      auto doc = base_document(kLabeledTypes);
      doc.body = body({}, {bp}, nullptr);
      doc.explicit_bps = {bp};
      out.documents.push_back(std::move(doc));
    }
    for (std::size_t i = 0; i < cfg_.unlabeled; ++i) {
      auto doc = base_document(kOtherTypes);
      if (i % 2 == 0) {
        const std::size_t c = rng_.index(cfg_.classes);
        doc.body = body({c}, {}, nullptr);
        if (i % 10 == 0) {
          // Alternative phrasing that the default patterns deliberately ignore.
          doc.body += "\n\nAplica-se o verbete vinculante nº " + std::to_string(out.class_ids[c]) + " da súmula.";
        }
      } else {
        doc.body = body({}, {}, nullptr);
      }
      out.documents.push_back(std::move(doc));
    }
    const std::size_t originals = out.documents.size();
    for (std::size_t i = 0; i < cfg_.duplicates && originals > 0; ++i) {
      Document copy = out.documents[rng_.index(std::min(originals, cfg_.classes * cfg_.docs_per_class))];
      copy.id = next_id();
      copy.title = "Cópia " + copy.title;
      copy.body = "  " + copy.body + "\n";
      out.documents.push_back(std::move(copy));
    }
    return out;
  }

 private:
  std::string next_id() {
    char buf[16];
    std::snprintf(buf, sizeof buf, "D%06zu", ++doc_counter_);
    return buf;
  }

  std::string fresh_word() {
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.index(3);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.index(std::size(kOnsets))];
        w += kVowels[rng_.index(std::size(kVowels))];
      }
      w += kCodas[rng_.index(std::size(kCodas))];
      if (stopwords_.count(w)) continue;
      if (!stems_.insert(stem_portuguese(w)).second) continue;
      return w;
    }
  }

  std::vector<std::string> fresh_words(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fresh_word());
    return out;
  }

  std::string pick_word(std::optional<std::size_t> cls, double rate) {
    if (cls && rng_.uniform() < rate) {
      const auto& words = (*words_)[*cls];
      return words[rng_.index(words.size())];
    }
    if (rng_.uniform() < 0.3) {
      const auto& stops = portuguese_stopwords();
      return stops[rng_.index(std::min<std::size_t>(stops.size(), 40))];
    }
    return common_[rng_.index(common_.size())];
  }

  std::string sentence(std::optional<std::size_t> cls, double rate) {
    const std::size_t n = 6 + rng_.index(9);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      std::string w = pick_word(cls, rate);
      if (i == 0) {
        auto u = text::decode(w);
        u[0] = text::to_upper(u[0]);
        w = text::encode(u);
      } else {
        s += ' ';
      }
      s += w;
      if (i + 1 < n && i > 2 && rng_.uniform() < 0.08) s += ',';
    }
    return s + '.';
  }

  std::string body(const std::vector<std::size_t>& classes, const std::vector<BpId>& cites, const std::string* quote) {
    const std::size_t paragraphs = 3 + rng_.index(4);
    std::vector<std::string> paras;
    for (std::size_t p = 0; p < paragraphs; ++p) {
      const std::size_t sentences = 2 + rng_.index(4);
      std::string para;
      for (std::size_t s = 0; s < sentences; ++s) {
        if (!para.empty()) para += ' ';
        if (!classes.empty() && rng_.uniform() < cfg_.topical_sentences) {
          para += sentence(classes[rng_.index(classes.size())], cfg_.topical_rate);
        } else {
          para += sentence(classes.empty() ? std::nullopt : std::optional(classes[rng_.index(classes.size())]),
                           cfg_.filler_rate);
        }
      }
      paras.push_back(std::move(para));
    }
    for (BpId bp : cites) {
      const auto phrase = format_one(kCitationForms[rng_.index(std::size(kCitationForms))], std::to_string(bp));
      auto& para = paras[rng_.index(paras.size())];
      para += ' ';
      para += format_one(kCitationFrames[rng_.index(std::size(kCitationFrames))], phrase);
    }
    if (quote) paras.insert(paras.begin() + static_cast<std::ptrdiff_t>(1 + rng_.index(paras.size())), *quote);
    std::string out;
    for (std::size_t i = 0; i < paras.size(); ++i) {
      if (i) out += "\n\n";
      out += paras[i];
    }
    return out;
  }

  template <std::size_t N>
  Document base_document(const char* const (&types)[N]) {
    Document d;
    d.id = next_id();
    d.doc_type = types[rng_.index(N)];
    d.title = d.doc_type + " " + std::to_string(1000 + rng_.index(90000));
    const double u = rng_.uniform();
    if (u < 0.05) {
      d.date.reset();
    } else {
      d.date = Date{2008 + static_cast<int>(rng_.index(14)), 1 + static_cast<int>(rng_.index(12)),
                    1 + static_cast<int>(rng_.index(28))};
    }
    d.rapporteur = rng_.uniform() < 0.05 ? std::string(kUnknownJustice)
                                         : std::string(kRapporteurs[rng_.index(std::size(kRapporteurs))]);
    return d;
  }

  const SynthConfig& cfg_;
  Rng rng_;
  std::unordered_set<std::string> stopwords_;
  std::unordered_set<std::string> stems_;
  std::vector<std::string> common_;
  const std::vector<std::vector<std::string>>* words_ = nullptr;
  std::size_t doc_counter_ = 0;
};

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config) {
  Generator g(config);
  return g.run();
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream docs(dir / "documents.jsonl", std::ios::binary);
  std::ofstream precs(dir / "precedents.jsonl", std::ios::binary);
  if (!docs || !precs) throw Error("cannot write corpus files in " + dir.string());
  for (const auto& d : corpus.documents) {
    auto j = to_json(d);
    // About half of the undated documents carry the epoch marker instead of null.
    if (!d.date && text::fnv1a64(d.id) % 2 == 0) j["date"] = "1970-01-01";
    if (d.rapporteur == kUnknownJustice) j["rapporteur"] = nullptr;
    docs << j.dump() << '\n';
  }
  for (const auto& p : corpus.precedents) precs << to_json(p).dump() << '\n';
}

}  // namespace bpcite
