#include "chatbot/text_pipeline.hpp"

#include <sstream>

#include "chatbot/utf8.hpp"

namespace chatbot {

extern const char* const kBuiltinStopWordsText;  // generated from data/stopwords.txt

namespace {

bool is_separator(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\v' || c == U'\f' || c == U'\r' || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

// Characters removed from inside a token: ASCII punctuation, digits and controls,
// plus the common Unicode punctuation and symbol blocks.
bool is_stripped(char32_t c) {
  if (c < 0x80) return !((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'));
  if (c <= 0xBF) return true;  // C1 controls and Latin-1 punctuation/symbols
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2000 && c <= 0x2BFF) return true;
  if (c >= 0x3000 && c <= 0x303F) return true;
  if (c >= 0xFE30 && c <= 0xFE4F) return true;
  if (c >= 0xFF00 && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  if (c >= 0x1F000 && c <= 0x1FAFF) return true;
  return c == 0xFFFD;
}

}  // namespace

const StopWordList& StopWordList::builtin() {
  static const StopWordList list = [] {
    std::istringstream in(kBuiltinStopWordsText);
    return parse(in);
  }();
  return list;
}

StopWordList StopWordList::parse(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    for (char& c : word) c = static_cast<char>(utf8::ascii_lower(static_cast<unsigned char>(c)));
    words.insert(std::move(word));
  }
  return StopWordList(std::move(words));
}

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(utf8::encode(current));
    current.clear();
  };
  for (char32_t c : utf8::decode(text)) {
    if (is_separator(c)) {
      flush();
    } else if (!is_stripped(c)) {
      current.push_back(utf8::ascii_lower(c));
    }
  }
  flush();
  return tokens;
}

Token lemmatize(const Token& token) {
  const auto ends = [&](std::string_view suffix) {
    return token.size() >= suffix.size() && std::string_view(token).substr(token.size() - suffix.size()) == suffix;
  };
  const auto drop = [&](std::size_t n) { return token.substr(0, token.size() - n); };

  if (token.size() > 4 && ends("ies")) return drop(3) + "y";
  if (ends("sses")) return drop(2);
  if (token.size() > 4 && (ends("ches") || ends("shes"))) return drop(2);
  if (token.size() > 3 && ends("xes")) return drop(2);
  if (token.size() > 3 && ends("s")) {
    const char before = token[token.size() - 2];
    if (before != 's' && before != 'u' && before != 'i') return drop(1);
  }
  return token;
}

Token stem(const Token& token) {
  Token current = token;
  // Porter2 never lengthens a word net of the suffix it removes, so this settles quickly.
  for (int i = 0; i < 8; ++i) {
    Token next = porter2(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

TokenList remove_stop_words(const TokenList& tokens, const StopWordList& stop_words) {
  TokenList kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stop_words.contains(t)) kept.push_back(t);
  }
  return kept;
}

TokenList preprocess_for_intent(std::string_view text) {
  TokenList tokens = tokenize(text);
  for (auto& t : tokens) t = stem(lemmatize(t));
  return tokens;
}

TokenList preprocess_for_ner(std::string_view text, const StopWordList& stop_words) {
  return remove_stop_words(tokenize(text), stop_words);
}

}  // namespace chatbot
