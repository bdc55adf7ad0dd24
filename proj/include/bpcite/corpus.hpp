#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpcite/errors.hpp"

namespace bpcite {

using BpId = int;

inline constexpr std::string_view kUnknownJustice = "unknown justice";

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  /// Parses YYYY-MM-DD and validates the calendar day.
  static std::optional<Date> parse(std::string_view iso);
  std::string iso() const;
  auto operator<=>(const Date&) const = default;
};

struct YearMonth {
  int year = 0;
  int month = 0;

  static std::optional<YearMonth> parse(std::string_view text);  // YYYY-MM
  std::string str() const;
  auto operator<=>(const YearMonth&) const = default;
};

inline YearMonth month_of(const Date& d) { return {d.year, d.month}; }

struct BindingPrecedent {
  BpId id = 0;
  std::string statement;
  std::optional<Date> published;
};

struct Document {
  std::string id;
  std::string title;
  std::string body;
  std::optional<Date> date;  // nullopt for missing or epoch-marker dates
  std::string rapporteur{kUnknownJustice};
  std::string doc_type;
  std::vector<BpId> explicit_bps;  // sorted, unique

  bool single_label() const { return explicit_bps.size() == 1; }
  bool cites(BpId bp) const;
};

struct LoadIssue {
  std::string file;
  std::size_t line = 0;
  std::string field;  // empty when the whole line is unparseable
  std::string message;
};

struct LoadReport {
  std::size_t accepted = 0;
  std::vector<LoadIssue> issues;
  bool clean() const { return issues.empty(); }
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<BindingPrecedent> precedents;
  LoadReport report;
};

/// Rejected lines land in `report`; duplicate ids throw DataError.
std::vector<BindingPrecedent> load_precedents(const std::filesystem::path& path, LoadReport& report);
std::vector<Document> load_documents(const std::filesystem::path& path, std::span<const BindingPrecedent> known,
                                     LoadReport& report);
Corpus load_corpus(const std::filesystem::path& documents, const std::filesystem::path& precedents);

/// Schema violation in one record; `field` names the offending key.
class FieldError : public DataError {
 public:
  FieldError(std::string field, const std::string& message)
      : DataError("field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Single-record parsers shared by the loaders; they throw DataError naming the field.
Document parse_document(const nlohmann::json& j, std::span<const BindingPrecedent> known);
BindingPrecedent parse_precedent(const nlohmann::json& j);

nlohmann::json to_json(const Document& d);
nlohmann::json to_json(const BindingPrecedent& bp);

/// Whitespace-collapsed, lowercased body used as the duplicate key.
std::string duplicate_key(std::string_view body);

/// Keeps one document per duplicate key (smallest id wins); output sorted by id.
std::vector<Document> dedupe(std::span<const Document> docs);

/// The `limit` class ids with most single-label documents (ties to the lower id), returned ascending.
std::vector<BpId> most_cited(std::span<const Document> docs, std::size_t limit);

/// Balanced single-label sample with exactly `per_class` documents per id.
std::vector<Document> build_sample(std::span<const Document> docs, std::span<const BpId> bp_ids,
                                   std::size_t per_class, std::uint64_t seed);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// Per-class quota by largest remainder; ties go to the earlier set (train first).
std::vector<std::size_t> stratum_counts(std::size_t n, const SplitRatios& ratios);

/// Stratified by the single label of every sample document.
CorpusSplit split(std::span<const Document> sample, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace bpcite
