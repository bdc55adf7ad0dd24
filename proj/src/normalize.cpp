#include "bpcite/normalize.hpp"

#include <algorithm>
#include <fstream>

#include "bpcite/errors.hpp"

namespace bpcite {

const std::vector<std::string>& portuguese_stopwords() {
  static const std::vector<std::string> kWords = {
      "a", "à", "ao", "aos", "aquela", "aquelas", "aquele", "aqueles", "aquilo", "as", "às", "até", "com",
      "como", "da", "das", "de", "dela", "delas", "dele", "deles", "depois", "do", "dos", "e", "é", "ela",
      "elas", "ele", "eles", "em", "entre", "era", "eram", "éramos", "essa", "essas", "esse", "esses", "esta",
      "está", "estamos", "estão", "estar", "estas", "estava", "estavam", "estávamos", "este", "esteja",
      "estejam", "estejamos", "estes", "esteve", "estive", "estivemos", "estiver", "estivera", "estiveram",
      "estivéramos", "estiverem", "estivermos", "estivesse", "estivessem", "estivéssemos", "estou", "eu",
      "foi", "fomos", "for", "fora", "foram", "fôramos", "forem", "formos", "fosse", "fossem", "fôssemos",
      "fui", "há", "haja", "hajam", "hajamos", "hão", "havemos", "haver", "hei", "houve", "houvemos",
      "houver", "houvera", "houverá", "houveram", "houvéramos", "houverão", "houverei", "houverem",
      "houveremos", "houveria", "houveriam", "houveríamos", "houvermos", "houvesse", "houvessem",
      "houvéssemos", "isso", "isto", "já", "lhe", "lhes", "mais", "mas", "me", "mesmo", "meu", "meus",
      "minha", "minhas", "muito", "na", "não", "nas", "nem", "no", "nos", "nós", "nossa", "nossas", "nosso",
      "nossos", "num", "numa", "o", "os", "ou", "para", "pela", "pelas", "pelo", "pelos", "por", "qual",
      "quando", "que", "quem", "são", "se", "seja", "sejam", "sejamos", "sem", "ser", "será", "serão",
      "serei", "seremos", "seria", "seriam", "seríamos", "seu", "seus", "só", "somos", "sou", "sua", "suas",
      "também", "te", "tem", "tém", "temos", "tenha", "tenham", "tenhamos", "tenho", "terá", "terão",
      "terei", "teremos", "teria", "teriam", "teríamos", "teu", "teus", "teve", "tinha", "tinham",
      "tínhamos", "tive", "tivemos", "tiver", "tivera", "tiveram", "tivéramos", "tiverem", "tivermos",
      "tivesse", "tivessem", "tivéssemos", "tu", "tua", "tuas", "um", "uma", "você", "vocês", "vos"};
  return kWords;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    auto t = text::trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

Normalizer::Normalizer(const NormalizerConfig& config) {
  stopword_id_ = config.stopwords;
  if (config.stopwords == "pt") {
    stopwords_.insert(portuguese_stopwords().begin(), portuguese_stopwords().end());
  } else if (config.stopwords == "file") {
    for (auto& w : read_lines(config.stopword_file, "stopword list")) custom_stopwords_.push_back(text::lowercase(w));
  } else if (config.stopwords != "none") {
    throw ConfigError("unknown stopword list '" + config.stopwords + "' (expected pt, none or file)");
  }

  stemmer_id_ = config.stemmer;
  if (config.stemmer == "pt-snowball") {
    stemmer_ = Stemmer::Snowball;
  } else if (config.stemmer == "none") {
    stemmer_ = Stemmer::None;
  } else if (config.stemmer == "lemma-table") {
    stemmer_ = Stemmer::LemmaTable;
    for (const auto& line : read_lines(config.lemma_table, "lemma table")) {
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw ConfigError("lemma table line without a tab: '" + line + "'");
      lemmas_[text::lowercase(text::trim(line.substr(0, tab)))] = text::lowercase(text::trim(line.substr(tab + 1)));
    }
  } else {
    throw ConfigError("unknown stemmer '" + config.stemmer + "' (expected pt-snowball, none or lemma-table)");
  }
  finish();
}

void Normalizer::finish() {
  std::sort(custom_stopwords_.begin(), custom_stopwords_.end());
  custom_stopwords_.erase(std::unique(custom_stopwords_.begin(), custom_stopwords_.end()), custom_stopwords_.end());
  stopwords_.insert(custom_stopwords_.begin(), custom_stopwords_.end());
  std::string canon = "stopwords=" + stopword_id_ + ";";
  for (const auto& w : custom_stopwords_) canon += w + ",";
  canon += ";stemmer=" + stemmer_id_ + ";";
  for (const auto& [form, lemma] : lemmas_) canon += form + ">" + lemma + ",";
  fingerprint_ = text::fingerprint(canon);
}

std::vector<RawToken> Normalizer::tokenize(std::string_view body) {
  std::vector<RawToken> out;
  std::size_t i = 0;
  while (i < body.size()) {
    auto cp = text::decode_at(body, i);
    if (!text::is_word_char(cp.value)) {
      i += cp.length;
      continue;
    }
    RawToken tok;
    tok.span.begin = i;
    while (i < body.size()) {
      cp = text::decode_at(body, i);
      if (!text::is_word_char(cp.value)) break;
      text::append_utf8(tok.lower, text::to_lower(cp.value));
      i += cp.length;
    }
    tok.span.end = i;
    out.push_back(std::move(tok));
  }
  return out;
}

std::string Normalizer::term(std::string_view lower) const {
  if (stopwords_.count(std::string(lower))) return {};
  switch (stemmer_) {
    case Stemmer::Snowball:
      return stem_portuguese(lower);
    case Stemmer::LemmaTable: {
      auto it = lemmas_.find(std::string(lower));
      return it == lemmas_.end() ? std::string(lower) : it->second;
    }
    case Stemmer::None:
      break;
  }
  return std::string(lower);
}

TokenSeq Normalizer::normalize(std::string_view body) const {
  TokenSeq out;
  for (const auto& tok : tokenize(body)) {
    auto t = term(tok.lower);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

nlohmann::json Normalizer::to_json() const {
  nlohmann::json j;
  j["stopwords"] = stopword_id_;
  j["custom_stopwords"] = custom_stopwords_;
  j["stemmer"] = stemmer_id_;
  j["lemmas"] = lemmas_;
  j["fingerprint"] = fingerprint_;
  return j;
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  Normalizer n{Blank{}};
  n.stopword_id_ = j.at("stopwords").get<std::string>();
  if (n.stopword_id_ == "pt") {
    n.stopwords_.insert(portuguese_stopwords().begin(), portuguese_stopwords().end());
  } else if (n.stopword_id_ != "none" && n.stopword_id_ != "file") {
    throw ConfigError("unknown stopword list '" + n.stopword_id_ + "' in artifact");
  }
  n.custom_stopwords_ = j.at("custom_stopwords").get<std::vector<std::string>>();
  n.stemmer_id_ = j.at("stemmer").get<std::string>();
  if (n.stemmer_id_ == "pt-snowball") {
    n.stemmer_ = Stemmer::Snowball;
  } else if (n.stemmer_id_ == "none") {
    n.stemmer_ = Stemmer::None;
  } else if (n.stemmer_id_ == "lemma-table") {
    n.stemmer_ = Stemmer::LemmaTable;
  } else {
    throw ConfigError("unknown stemmer '" + n.stemmer_id_ + "' in artifact");
  }
  n.lemmas_ = j.at("lemmas").get<std::map<std::string, std::string>>();
  n.finish();
  if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != n.fingerprint_)
    throw ConfigError("normalizer fingerprint mismatch in artifact");
  return n;
}

}  // namespace bpcite
