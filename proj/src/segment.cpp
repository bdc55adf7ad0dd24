#include "bpcite/segment.hpp"

namespace bpcite {

std::unordered_set<std::string> SegmentConfig::default_abbreviations() {
  return {"art.", "arts.", "n.", "nº.", "no.", "num.", "inc.", "incs.", "par.", "al.", "fl.", "fls.", "p.",
          "pp.", "min.", "rel.", "sr.", "sra.", "srs.", "dr.", "dra.", "drs.", "exmo.", "exma.", "ex.", "cf.",
          "v.g.", "e.g.", "i.e.", "etc.", "vol.", "cap.", "ed.", "adv.", "proc.", "resp.", "agr.", "reg.",
          "rcl.", "re.", "are.", "ai.", "hc.", "ms.", "adi.", "adpf.", "inq.", "pet.", "stf.", "stj.", "dj.",
          "dje.", "doc.", "docs.", "jan.", "fev.", "mar.", "abr.", "mai.", "jun.", "jul.", "ago.", "set.",
          "out.", "nov.", "dez."};
}

namespace {

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

// Trim whitespace inside [begin, end) of body.
Span trimmed(std::string_view body, std::size_t begin, std::size_t end) {
  while (begin < end) {
    auto cp = text::decode_at(body, begin);
    if (!text::is_space(cp.value)) break;
    begin += cp.length;
  }
  while (end > begin) {
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(body[start]) & 0xC0) == 0x80) --start;
    auto cp = text::decode_at(body, start);
    if (!text::is_space(cp.value)) break;
    end = start;
  }
  return {begin, end};
}

std::vector<Span> split_paragraphs(std::string_view body) {
  std::vector<Span> out;
  std::size_t para_begin = std::string_view::npos;
  std::size_t para_end = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    std::size_t line_end = nl == std::string_view::npos ? body.size() : nl;
    const bool blank = text::is_blank(body.substr(pos, line_end - pos));
    if (blank) {
      if (para_begin != std::string_view::npos) out.push_back(trimmed(body, para_begin, para_end));
      para_begin = std::string_view::npos;
    } else {
      if (para_begin == std::string_view::npos) para_begin = pos;
      para_end = line_end;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (para_begin != std::string_view::npos) out.push_back(trimmed(body, para_begin, para_end));
  return out;
}

// Lowercased word ending at (and including) the punctuation at `dot`.
std::string word_before(std::string_view body, std::size_t lo, std::size_t dot) {
  std::size_t start = dot;
  while (start > lo) {
    std::size_t prev = start - 1;
    while (prev > lo && (static_cast<unsigned char>(body[prev]) & 0xC0) == 0x80) --prev;
    if (text::is_space(text::decode_at(body, prev).value)) break;
    start = prev;
  }
  return text::lowercase(body.substr(start, dot + 1 - start));
}

}  // namespace

SegmentedText segment(std::string_view body, const SegmentConfig& config) {
  SegmentedText out;
  out.paragraphs = split_paragraphs(body);
  for (std::size_t p = 0; p < out.paragraphs.size(); ++p) {
    const Span para = out.paragraphs[p];
    std::size_t sent_begin = para.begin;
    std::size_t i = para.begin;
    while (i < para.end) {
      auto cp = text::decode_at(body, i);
      std::size_t next = i + cp.length;
      if (!is_terminal(cp.value)) {
        i = next;
        continue;
      }
      // Need at least one whitespace, then uppercase or digit.
      std::size_t j = next;
      bool saw_space = false;
      while (j < para.end) {
        auto c = text::decode_at(body, j);
        if (!text::is_space(c.value)) break;
        saw_space = true;
        j += c.length;
      }
      bool boundary = false;
      if (saw_space && j < para.end) {
        auto c = text::decode_at(body, j);
        boundary = text::is_upper(c.value) || text::is_digit(c.value);
      }
      if (boundary && cp.value == U'.' && config.abbreviations.count(word_before(body, sent_begin, i))) boundary = false;
      if (boundary) {
        out.sentences.push_back(trimmed(body, sent_begin, next));
        out.sentence_paragraph.push_back(p);
        sent_begin = j;
        i = j;
      } else {
        i = next;
      }
    }
    Span last = trimmed(body, sent_begin, para.end);
    if (!last.empty()) {
      out.sentences.push_back(last);
      out.sentence_paragraph.push_back(p);
    }
  }
  return out;
}

}  // namespace bpcite
