// Snowball Portuguese stemmer (https://snowballstem.org/algorithms/portuguese/stemmer.html).
// Nasal vowels ã/õ are rewritten as a~/o~ before suffix stripping and restored after.

#include <span>
#include <string>
#include <string_view>

#include "bpcite/normalize.hpp"

namespace bpcite {

namespace {

using Word = std::u32string;
using Suffix = std::u32string_view;

bool is_vowel(char32_t c) {
  switch (c) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
    case U'á': case U'é': case U'í': case U'ó': case U'ú':
    case U'â': case U'ê': case U'ô':
      return true;
    default:
      return false;
  }
}

bool ends_with(const Word& w, Suffix s) { return w.size() >= s.size() && Suffix(w).substr(w.size() - s.size()) == s; }

// Position after the first non-vowel that follows a vowel, searching from `from`.
std::size_t region_after(const Word& w, std::size_t from) {
  std::size_t i = from;
  while (i < w.size() && !is_vowel(w[i])) ++i;
  if (i >= w.size()) return w.size();
  ++i;
  while (i < w.size() && is_vowel(w[i])) ++i;
  return i >= w.size() ? w.size() : i + 1;
}

struct Regions {
  std::size_t rv, r1, r2;
};

Regions mark_regions(const Word& w) {
  const std::size_t n = w.size();
  Regions r{n, n, n};
  if (n >= 2) {
    auto gopast = [&](bool vowel) -> std::size_t {
      for (std::size_t i = 2; i < n; ++i)
        if (is_vowel(w[i]) == vowel) return i + 1;
      return n;
    };
    if (is_vowel(w[0]))
      r.rv = is_vowel(w[1]) ? gopast(false) : gopast(true);
    else
      r.rv = is_vowel(w[1]) ? (n >= 3 ? 3 : n) : gopast(true);
  }
  r.r1 = region_after(w, 0);
  r.r2 = region_after(w, r.r1);
  return r;
}

// Longest suffix of `w` from `list`; empty view when none matches.
Suffix longest(const Word& w, std::span<const Suffix> list, std::size_t min_start = 0) {
  Suffix best;
  for (Suffix s : list)
    if (s.size() > best.size() && ends_with(w, s) && w.size() - s.size() >= min_start) best = s;
  return best;
}

std::size_t start_of(const Word& w, Suffix s) { return w.size() - s.size(); }

void chop(Word& w, std::size_t count) { w.resize(w.size() - count); }

constexpr Suffix kDeleteR2[] = {
    U"ância",
    U"eza", U"ezas", U"ico", U"ica", U"icos", U"icas", U"ismo", U"ismos", U"ável", U"ível",
    U"ista", U"istas", U"oso", U"osa", U"osos", U"osas", U"amento", U"amentos", U"imento", U"imentos",
    U"adora", U"ador", U"aça~o", U"adoras", U"adores", U"aço~es", U"ante", U"antes"};

constexpr Suffix kLogia[] = {U"logia", U"logias"};
constexpr Suffix kUcao[] = {U"uça~o", U"uço~es"};
constexpr Suffix kEncia[] = {U"ência", U"ências"};
constexpr Suffix kAmente[] = {U"amente"};
constexpr Suffix kMente[] = {U"mente"};
constexpr Suffix kIdade[] = {U"idade", U"idades"};
constexpr Suffix kIva[] = {U"iva", U"ivo", U"ivas", U"ivos"};
constexpr Suffix kIra[] = {U"ira", U"iras"};

enum class Rule { DeleteR2, Logia, Ucao, Encia, Amente, Mente, Idade, Iva, Ira };

bool standard_suffix(Word& w, const Regions& r) {
  Suffix best;
  Rule rule = Rule::DeleteR2;
  auto consider = [&](Suffix s, Rule which) {
    if (s.size() > best.size()) {
      best = s;
      rule = which;
    }
  };
  consider(longest(w, kDeleteR2), Rule::DeleteR2);
  consider(longest(w, kLogia), Rule::Logia);
  consider(longest(w, kUcao), Rule::Ucao);
  consider(longest(w, kEncia), Rule::Encia);
  consider(longest(w, kAmente), Rule::Amente);
  consider(longest(w, kMente), Rule::Mente);
  consider(longest(w, kIdade), Rule::Idade);
  consider(longest(w, kIva), Rule::Iva);
  consider(longest(w, kIra), Rule::Ira);
  if (best.empty()) return false;

  const std::size_t start = start_of(w, best);
  auto replace = [&](std::u32string_view with) {
    w.resize(start);
    w.append(with);
  };
  auto try_delete_r2 = [&](Suffix s) {
    if (ends_with(w, s) && start_of(w, s) >= r.r2) chop(w, s.size());
  };

  switch (rule) {
    case Rule::DeleteR2:
      if (start < r.r2) return false;
      w.resize(start);
      return true;
    case Rule::Logia:
      if (start < r.r2) return false;
      replace(U"log");
      return true;
    case Rule::Ucao:
      if (start < r.r2) return false;
      replace(U"u");
      return true;
    case Rule::Encia:
      if (start < r.r2) return false;
      replace(U"ente");
      return true;
    case Rule::Amente: {
      if (start < r.r1) return false;
      w.resize(start);
      static constexpr Suffix kAfter[] = {U"iv", U"os", U"ic", U"ad"};
      Suffix s = longest(w, kAfter);
      if (!s.empty() && start_of(w, s) >= r.r2) {
        chop(w, s.size());
        if (s == U"iv") try_delete_r2(U"at");
      }
      return true;
    }
    case Rule::Mente: {
      if (start < r.r2) return false;
      w.resize(start);
      static constexpr Suffix kAfter[] = {U"ante", U"avel", U"ível"};
      Suffix s = longest(w, kAfter);
      if (!s.empty()) try_delete_r2(s);
      return true;
    }
    case Rule::Idade: {
      if (start < r.r2) return false;
      w.resize(start);
      static constexpr Suffix kAfter[] = {U"abil", U"ic", U"iv"};
      Suffix s = longest(w, kAfter);
      if (!s.empty()) try_delete_r2(s);
      return true;
    }
    case Rule::Iva:
      if (start < r.r2) return false;
      w.resize(start);
      try_delete_r2(U"at");
      return true;
    case Rule::Ira:
      if (start < r.rv || start == 0 || w[start - 1] != U'e') return false;
      replace(U"ir");
      return true;
  }
  return false;
}

constexpr Suffix kVerb[] = {
    U"ada", U"ida", U"ia", U"aria", U"eria", U"iria", U"ará", U"ara", U"erá", U"era", U"irá", U"ava",
    U"asse", U"esse", U"isse", U"aste", U"este", U"iste", U"ei", U"arei", U"erei", U"irei", U"am", U"iam",
    U"ariam", U"eriam", U"iriam", U"aram", U"eram", U"iram", U"avam", U"em", U"arem", U"erem", U"irem",
    U"assem", U"essem", U"issem", U"ado", U"ido", U"ando", U"endo", U"indo", U"ara~o", U"era~o", U"ira~o",
    U"ar", U"er", U"ir", U"as", U"adas", U"idas", U"ias", U"arias", U"erias", U"irias", U"arás", U"aras",
    U"erás", U"eras", U"irás", U"avas", U"es", U"ardes", U"erdes", U"irdes", U"ares", U"eres", U"ires",
    U"asses", U"esses", U"isses", U"astes", U"estes", U"istes", U"is", U"ais", U"eis", U"íeis", U"aríeis",
    U"eríeis", U"iríeis", U"áreis", U"areis", U"éreis", U"ereis", U"íreis", U"ireis", U"ásseis", U"ésseis",
    U"ísseis", U"áveis", U"ados", U"idos", U"ámos", U"amos", U"íamos", U"aríamos", U"eríamos", U"iríamos",
    U"áramos", U"éramos", U"íramos", U"ávamos", U"emos", U"aremos", U"eremos", U"iremos", U"ássemos",
    U"êssemos", U"íssemos", U"imos", U"armos", U"ermos", U"irmos", U"eu", U"iu", U"ou", U"ira", U"iras"};

bool verb_suffix(Word& w, const Regions& r) {
  Suffix s = longest(w, kVerb, r.rv);
  if (s.empty()) return false;
  chop(w, s.size());
  return true;
}

void residual_suffix(Word& w, const Regions& r) {
  static constexpr Suffix kResidual[] = {U"os", U"a", U"i", U"o", U"á", U"í", U"ó"};
  Suffix s = longest(w, kResidual);
  if (!s.empty() && start_of(w, s) >= r.rv) chop(w, s.size());
}

void residual_form(Word& w, const Regions& r) {
  if (w.empty()) return;
  const char32_t last = w.back();
  if (last == U'e' || last == U'é' || last == U'ê') {
    if (w.size() - 1 < r.rv) return;
    chop(w, 1);
    const std::size_t n = w.size();
    if (n >= 2 && ((w[n - 1] == U'u' && w[n - 2] == U'g') || (w[n - 1] == U'i' && w[n - 2] == U'c')) &&
        n - 1 >= r.rv)
      chop(w, 1);
  } else if (last == U'ç') {
    w.back() = U'c';
  }
}

}  // namespace

std::string stem_portuguese(std::string_view word) {
  Word w;
  for (char32_t c : text::decode(word)) {
    if (c == U'ã') {
      w += U"a~";
    } else if (c == U'õ') {
      w += U"o~";
    } else {
      w.push_back(c);
    }
  }
  const Regions r = mark_regions(w);

  const bool changed = standard_suffix(w, r) || verb_suffix(w, r);
  if (changed) {
    const std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == U'i' && w[n - 2] == U'c' && n - 1 >= r.rv) chop(w, 1);
  } else {
    residual_suffix(w, r);
  }
  residual_form(w, r);

  std::u32string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 1 < w.size() && w[i + 1] == U'~' && (w[i] == U'a' || w[i] == U'o')) {
      out.push_back(w[i] == U'a' ? U'ã' : U'õ');
      ++i;
    } else {
      out.push_back(w[i]);
    }
  }
  return text::encode(out);
}

}  // namespace bpcite
