#include "bpcite/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "bpcite/random.hpp"
#include "bpcite/text.hpp"

namespace bpcite {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw FieldError(field, "missing");
  return *it;
}

std::string require_string(const nlohmann::json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) throw FieldError(field, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FieldError(field, "expected a string or null");
  return it->get<std::string>();
}

// Epoch markers stand for "no valid date" and are kept as absent.
std::optional<Date> parse_date_field(const nlohmann::json& j, const char* field) {
  auto raw = optional_string(j, field);
  if (!raw) return std::nullopt;
  auto d = Date::parse(*raw);
  if (!d) throw FieldError(field, "not an ISO-8601 YYYY-MM-DD date: '" + *raw + "'");
  if (d->year == 1970 && d->month == 1 && d->day == 1) return std::nullopt;
  return d;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::is_blank(line)) continue;
    fn(number, line);
  }
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  Date d;
  if (!parse_int(iso.substr(0, 4), d.year) || !parse_int(iso.substr(5, 2), d.month) ||
      !parse_int(iso.substr(8, 2), d.day))
    return std::nullopt;
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  YearMonth ym;
  if (!parse_int(text.substr(0, 4), ym.year) || !parse_int(text.substr(5, 2), ym.month)) return std::nullopt;
  if (ym.month < 1 || ym.month > 12) return std::nullopt;
  return ym;
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

bool Document::cites(BpId bp) const { return std::binary_search(explicit_bps.begin(), explicit_bps.end(), bp); }

BindingPrecedent parse_precedent(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  BindingPrecedent bp;
  const auto& id = require(j, "id");
  if (!id.is_number_integer() || id.get<long long>() <= 0) throw FieldError("id", "expected a positive integer");
  bp.id = id.get<int>();
  bp.statement = require_string(j, "statement");
  if (text::is_blank(bp.statement)) throw FieldError("statement", "empty");
  bp.published = parse_date_field(j, "published");
  return bp;
}

Document parse_document(const nlohmann::json& j, std::span<const BindingPrecedent> known) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  Document d;
  d.id = require_string(j, "id");
  if (d.id.empty()) throw FieldError("id", "empty");
  d.title = require_string(j, "title");
  d.body = require_string(j, "body");
  if (text::is_blank(d.body)) throw FieldError("body", "empty");
  d.date = parse_date_field(j, "date");
  if (auto r = optional_string(j, "rapporteur"); r && !text::is_blank(*r)) d.rapporteur = *r;
  d.doc_type = require_string(j, "doc_type");
  const auto& bps = require(j, "explicit_bps");
  if (!bps.is_array()) throw FieldError("explicit_bps", "expected an array of integers");
  for (const auto& v : bps) {
    if (!v.is_number_integer() || v.get<long long>() <= 0)
      throw FieldError("explicit_bps", "expected positive integers");
    const int bp = v.get<int>();
    if (!known.empty() &&
        std::none_of(known.begin(), known.end(), [&](const BindingPrecedent& p) { return p.id == bp; }))
      throw FieldError("explicit_bps", "unknown binding precedent " + std::to_string(bp));
    d.explicit_bps.push_back(bp);
  }
  std::sort(d.explicit_bps.begin(), d.explicit_bps.end());
  d.explicit_bps.erase(std::unique(d.explicit_bps.begin(), d.explicit_bps.end()), d.explicit_bps.end());
  return d;
}

nlohmann::json to_json(const Document& d) {
  nlohmann::json j;
  j["id"] = d.id;
  j["title"] = d.title;
  j["body"] = d.body;
  j["date"] = d.date ? nlohmann::json(d.date->iso()) : nlohmann::json(nullptr);
  j["rapporteur"] = d.rapporteur;
  j["doc_type"] = d.doc_type;
  j["explicit_bps"] = d.explicit_bps;
  return j;
}

nlohmann::json to_json(const BindingPrecedent& bp) {
  nlohmann::json j;
  j["id"] = bp.id;
  j["statement"] = bp.statement;
  j["published"] = bp.published ? nlohmann::json(bp.published->iso()) : nlohmann::json(nullptr);
  return j;
}

std::vector<BindingPrecedent> load_precedents(const std::filesystem::path& path, LoadReport& report) {
  std::vector<BindingPrecedent> out;
  std::set<BpId> seen;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    try {
      auto bp = parse_precedent(nlohmann::json::parse(line));
      if (!seen.insert(bp.id).second)
        throw DataError(path.string() + ":" + std::to_string(number) + ": duplicate precedent id " +
                        std::to_string(bp.id));
      out.push_back(std::move(bp));
      ++report.accepted;
    } catch (const FieldError& e) {
      report.issues.push_back({path.string(), number, e.field(), e.what()});
    } catch (const nlohmann::json::exception& e) {
      report.issues.push_back({path.string(), number, "", std::string("malformed JSON: ") + e.what()});
    }
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<Document> load_documents(const std::filesystem::path& path, std::span<const BindingPrecedent> known,
                                     LoadReport& report) {
  std::vector<Document> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    try {
      auto doc = parse_document(nlohmann::json::parse(line), known);
      if (!seen.insert(doc.id).second)
        throw DataError(path.string() + ":" + std::to_string(number) + ": duplicate document id '" + doc.id + "'");
      out.push_back(std::move(doc));
      ++report.accepted;
    } catch (const FieldError& e) {
      report.issues.push_back({path.string(), number, e.field(), e.what()});
    } catch (const nlohmann::json::exception& e) {
      report.issues.push_back({path.string(), number, "", std::string("malformed JSON: ") + e.what()});
    }
  });
  return out;
}

Corpus load_corpus(const std::filesystem::path& documents, const std::filesystem::path& precedents) {
  Corpus c;
  c.precedents = load_precedents(precedents, c.report);
  c.documents = load_documents(documents, c.precedents, c.report);
  for (const auto& issue : c.report.issues)
    spdlog::warn("{}:{}: rejected ({})", issue.file, issue.line, issue.message);
  return c;
}

std::string duplicate_key(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < body.size();) {
    auto cp = text::decode_at(body, i);
    i += cp.length;
    if (text::is_space(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    text::append_utf8(out, text::to_lower(cp.value));
  }
  return out;
}

std::vector<Document> dedupe(std::span<const Document> docs) {
  std::map<std::string, const Document*> keep;
  for (const auto& d : docs) {
    auto [it, inserted] = keep.try_emplace(duplicate_key(d.body), &d);
    if (!inserted && d.id < it->second->id) it->second = &d;
  }
  std::vector<Document> out;
  out.reserve(keep.size());
  for (const auto& [key, doc] : keep) out.push_back(*doc);
  std::sort(out.begin(), out.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  return out;
}

std::vector<BpId> most_cited(std::span<const Document> docs, std::size_t limit) {
  std::map<BpId, std::size_t> counts;
  for (const auto& d : docs)
    if (d.single_label()) ++counts[d.explicit_bps.front()];
  std::vector<std::pair<BpId, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<BpId> out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(ranked[i].first);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Document> build_sample(std::span<const Document> docs, std::span<const BpId> bp_ids,
                                   std::size_t per_class, std::uint64_t seed) {
  std::vector<BpId> classes(bp_ids.begin(), bp_ids.end());
  std::sort(classes.begin(), classes.end());
  std::vector<Document> out;
  for (BpId bp : classes) {
    std::vector<const Document*> pool;
    for (const auto& d : docs)
      if (d.single_label() && d.explicit_bps.front() == bp) pool.push_back(&d);
    if (pool.size() < per_class)
      throw DataError("class " + std::to_string(bp) + " has " + std::to_string(pool.size()) +
                      " single-label documents, fewer than the requested " + std::to_string(per_class));
    std::sort(pool.begin(), pool.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
    Rng rng(mix_seed(seed, "sample:" + std::to_string(bp)));
    rng.shuffle(pool);
    for (std::size_t i = 0; i < per_class; ++i) out.push_back(*pool[i]);
  }
  return out;
}

std::vector<std::size_t> stratum_counts(std::size_t n, const SplitRatios& ratios) {
  const double r[3] = {ratios.train, ratios.validation, ratios.test};
  std::vector<std::size_t> counts(3);
  std::vector<double> remainder(3);
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * r[i];
    counts[i] = static_cast<std::size_t>(quota);
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<int> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

CorpusSplit split(std::span<const Document> sample, const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.validation, ratios.test})
    if (r < 0.0) throw ConfigError("split ratios must be non-negative");
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");

  std::map<BpId, std::vector<std::string>> by_class;
  for (const auto& d : sample) {
    if (!d.single_label()) throw DataError("document '" + d.id + "' is not single-label");
    by_class[d.explicit_bps.front()].push_back(d.id);
  }
  CorpusSplit out;
  out.seed = seed;
  for (auto& [bp, ids] : by_class) {
    if (ids.size() < 3)
      throw DataError("class " + std::to_string(bp) + " has fewer than 3 documents; cannot split");
    std::sort(ids.begin(), ids.end());
    Rng rng(mix_seed(seed, "split:" + std::to_string(bp)));
    rng.shuffle(ids);
    const auto counts = stratum_counts(ids.size(), ratios);
    auto it = ids.begin();
    out.train.insert(out.train.end(), it, it + counts[0]);
    it += counts[0];
    out.validation.insert(out.validation.end(), it, it + counts[1]);
    it += counts[1];
    out.test.insert(out.test.end(), it, it + counts[2]);
  }
  return out;
}

}  // namespace bpcite
