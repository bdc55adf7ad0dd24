#include "bpcite/citations.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <spdlog/spdlog.h>

#include "bpcite/errors.hpp"

namespace bpcite {

namespace {

// Folded text: "nº" -> "no", "n.º" -> "n.o", accents removed.
constexpr const char* kDefaultPattern =
    R"(\bsumula\s+vinculante\s*(?:(?:n\s*\.?\s*o|numero|num|no|n)\s*\.?\s*(?:[:\-]\s*)?)?(\d+))";

}  // namespace

CitationPatterns CitationPatterns::defaults() { return from_lines({kDefaultPattern}); }

CitationPatterns CitationPatterns::from_lines(std::vector<std::string> patterns) {
  CitationPatterns out;
  for (auto& p : patterns) {
    auto trimmed = text::trim(p);
    if (trimmed.empty()) continue;
    try {
      out.compiled_.push_back(
          std::make_shared<const std::regex>(trimmed, std::regex::ECMAScript | std::regex::icase));
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid citation pattern '" + trimmed + "': " + e.what());
    }
    if (out.compiled_.back()->mark_count() < 1)
      throw ConfigError("citation pattern '" + trimmed + "' has no capture group for the precedent number");
    out.sources_.push_back(std::move(trimmed));
  }
  if (out.sources_.empty()) throw ConfigError("citation pattern list is empty");
  return out;
}

CitationPatterns CitationPatterns::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pattern list " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return from_lines(std::move(lines));
}

std::vector<CitationMatch> CitationPatterns::detect(std::string_view body) const {
  const auto folded = text::fold(body);
  std::vector<std::pair<Span, BpId>> folded_hits;
  for (const auto& re : compiled_) {
    for (auto it = std::sregex_iterator(folded.text.begin(), folded.text.end(), *re); it != std::sregex_iterator();
         ++it) {
      const auto& m = *it;
      if (m.length(0) == 0) continue;
      const auto num = m.str(1);
      int bp = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), bp);
      if (ec != std::errc{} || ptr != num.data() + num.size() || bp <= 0) {
        spdlog::warn("citation match '{}' has no valid precedent number; ignored", m.str(0));
        continue;
      }
      const auto begin = static_cast<std::size_t>(m.position(0));
      folded_hits.push_back({{begin, begin + static_cast<std::size_t>(m.length(0))}, bp});
    }
  }
  std::sort(folded_hits.begin(), folded_hits.end(), [](const auto& a, const auto& b) {
    return a.first.begin != b.first.begin ? a.first.begin < b.first.begin : a.first.end > b.first.end;
  });
  std::vector<CitationMatch> out;
  std::size_t last_end = 0;
  for (const auto& [span, bp] : folded_hits) {
    if (!out.empty() && span.begin < last_end) continue;
    out.push_back({bp, folded.to_source(span.begin, span.end)});
    last_end = span.end;
  }
  return out;
}

std::string CitationPatterns::strip(std::string_view body) const {
  std::string current(body);
  for (;;) {
    const auto matches = detect(current);
    if (matches.empty()) return current;
    std::string next;
    next.reserve(current.size());
    std::size_t pos = 0;
    for (const auto& m : matches) {
      next.append(current, pos, m.span.begin - pos);
      next.push_back(' ');
      pos = m.span.end;
    }
    next.append(current, pos, std::string::npos);
    current = std::move(next);
  }
}

}  // namespace bpcite
