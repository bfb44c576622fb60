// Porter2 (Snowball English) stemmer.
#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <utility>

#include "chatbot/text_pipeline.hpp"

namespace chatbot {
namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool has_vowel(std::string_view w) { return std::any_of(w.begin(), w.end(), is_vowel); }

bool is_double(std::string_view w) {
  if (w.size() < 2) return false;
  const char c = w.back();
  if (c != w[w.size() - 2]) return false;
  return c == 'b' || c == 'd' || c == 'f' || c == 'g' || c == 'm' || c == 'n' || c == 'p' || c == 'r' ||
         c == 't';
}

bool is_li_ending(char c) {
  return c == 'c' || c == 'd' || c == 'e' || c == 'g' || c == 'h' || c == 'k' || c == 'm' || c == 'n' ||
         c == 'r' || c == 't';
}

// Short syllable ending exactly at `end` (exclusive).
bool short_syllable_at(std::string_view w, std::size_t end) {
  if (end == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
  if (end < 3) return false;
  const char last = w[end - 1];
  return !is_vowel(w[end - 3]) && is_vowel(w[end - 2]) && !is_vowel(last) && last != 'w' && last != 'x' &&
         last != 'Y';
}

std::size_t region_after(std::string_view w, std::size_t from) {
  for (std::size_t i = from + 1; i < w.size(); ++i) {
    if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
  }
  return w.size();
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Returns the longest matching suffix among `rules`, or nullptr.
template <std::size_t N>
const Rule* longest_match(std::string_view w, const std::array<Rule, N>& rules) {
  const Rule* best = nullptr;
  for (const auto& r : rules) {
    if (ends_with(w, r.suffix) && (best == nullptr || r.suffix.size() > best->suffix.size())) best = &r;
  }
  return best;
}

void replace_suffix(std::string& w, std::size_t suffix_len, std::string_view replacement) {
  w.resize(w.size() - suffix_len);
  w += replacement;
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 18> kException1{{
    {"skis", "ski"},   {"skies", "sky"},   {"dying", "die"},    {"lying", "lie"},   {"tying", "tie"},
    {"idly", "idl"},   {"gently", "gentl"}, {"ugly", "ugli"},    {"early", "earli"}, {"only", "onli"},
    {"singly", "singl"}, {"sky", "sky"},   {"news", "news"},    {"howe", "howe"},   {"atlas", "atlas"},
    {"cosmos", "cosmos"}, {"bias", "bias"}, {"andes", "andes"},
}};

constexpr std::array<std::string_view, 8> kException2{
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed"};

constexpr std::array<Rule, 24> kStep2{{
    {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},   {"abli", "able"},  {"entli", "ent"},
    {"izer", "ize"},    {"ization", "ize"}, {"ational", "ate"}, {"ation", "ate"},  {"ator", "ate"},
    {"alism", "al"},    {"aliti", "al"},    {"alli", "al"},     {"fulness", "ful"}, {"ousli", "ous"},
    {"ousness", "ous"}, {"iveness", "ive"}, {"iviti", "ive"},   {"biliti", "ble"}, {"bli", "ble"},
    {"ogi", "og"},      {"fulli", "ful"},   {"lessli", "less"}, {"li", ""},
}};

constexpr std::array<Rule, 9> kStep3{{
    {"tional", "tion"}, {"ational", "ate"}, {"alize", "al"}, {"icate", "ic"}, {"iciti", "ic"},
    {"ical", "ic"},     {"ful", ""},        {"ness", ""},    {"ative", ""},
}};

constexpr std::array<Rule, 18> kStep4{{
    {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},  {"able", ""},
    {"ible", ""}, {"ant", ""}, {"ement", ""}, {"ment", ""}, {"ent", ""}, {"ism", ""},
    {"ate", ""}, {"iti", ""},  {"ous", ""},  {"ive", ""}, {"ize", ""}, {"ion", ""},
}};

}  // namespace

Token porter2(const Token& token) {
  if (token.size() <= 2) return token;
  for (const auto& [word, out] : kException1) {
    if (token == word) return Token(out);
  }

  std::string w = token;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 'y' && (i == 0 || is_vowel(w[i - 1]))) w[i] = 'Y';
  }

  std::size_t r1 = w.size();
  if (w.starts_with("gener") || w.starts_with("arsen")) {
    r1 = 5;
  } else if (w.starts_with("commun")) {
    r1 = 6;
  } else {
    r1 = region_after(w, 0);
  }
  const std::size_t r2 = region_after(w, r1);

  // Step 1a
  if (ends_with(w, "sses")) {
    replace_suffix(w, 4, "ss");
  } else if (ends_with(w, "ied") || ends_with(w, "ies")) {
    replace_suffix(w, 3, w.size() > 4 ? "i" : "ie");
  } else if (ends_with(w, "us") || ends_with(w, "ss")) {
    // unchanged
  } else if (ends_with(w, "s")) {
    if (w.size() >= 2 && has_vowel(std::string_view(w).substr(0, w.size() - 2))) w.pop_back();
  }

  if (std::find(kException2.begin(), kException2.end(), w) != kException2.end()) return w;

  // Step 1b
  {
    static constexpr std::array<std::string_view, 6> kSuffixes{"eedly", "ingly", "edly", "eed", "ing", "ed"};
    for (auto suffix : kSuffixes) {
      if (!ends_with(w, suffix)) continue;
      const std::size_t start = w.size() - suffix.size();
      if (suffix == "eedly" || suffix == "eed") {
        if (start >= r1) replace_suffix(w, suffix.size(), "ee");
      } else if (has_vowel(std::string_view(w).substr(0, start))) {
        w.resize(start);
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
          w += 'e';
        } else if (is_double(w)) {
          w.pop_back();
        } else if (short_syllable_at(w, w.size()) && r1 >= w.size()) {
          w += 'e';
        }
      }
      break;
    }
  }

  // Step 1c
  if (w.size() > 2 && (w.back() == 'y' || w.back() == 'Y') && !is_vowel(w[w.size() - 2])) w.back() = 'i';

  // Step 2
  if (const Rule* rule = longest_match(w, kStep2)) {
    const std::size_t start = w.size() - rule->suffix.size();
    if (start >= r1) {
      if (rule->suffix == "ogi") {
        if (start > 0 && w[start - 1] == 'l') replace_suffix(w, 3, "og");
      } else if (rule->suffix == "li") {
        if (start > 0 && is_li_ending(w[start - 1])) w.resize(start);
      } else {
        replace_suffix(w, rule->suffix.size(), rule->replacement);
      }
    }
  }

  // Step 3
  if (const Rule* rule = longest_match(w, kStep3)) {
    const std::size_t start = w.size() - rule->suffix.size();
    if (start >= r1) {
      if (rule->suffix == "ative") {
        if (start >= r2) w.resize(start);
      } else {
        replace_suffix(w, rule->suffix.size(), rule->replacement);
      }
    }
  }

  // Step 4
  if (const Rule* rule = longest_match(w, kStep4)) {
    const std::size_t start = w.size() - rule->suffix.size();
    if (start >= r2) {
      if (rule->suffix == "ion") {
        if (start > 0 && (w[start - 1] == 's' || w[start - 1] == 't')) w.resize(start);
      } else {
        w.resize(start);
      }
    }
  }

  // Step 5
  if (!w.empty()) {
    const std::size_t last = w.size() - 1;
    if (w.back() == 'e') {
      if (last >= r2 || (last >= r1 && !short_syllable_at(w, last))) w.pop_back();
    } else if (w.back() == 'l') {
      if (last >= r2 && last > 0 && w[last - 1] == 'l') w.pop_back();
    }
  }

  std::replace(w.begin(), w.end(), 'Y', 'y');
  return w;
}

}  // namespace chatbot
