#ifndef CHATBOT_TEXT_PIPELINE_HPP_
#define CHATBOT_TEXT_PIPELINE_HPP_

#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace chatbot {

/// A normalized word: lowercase, no whitespace, no ASCII punctuation or digits.
using Token = std::string;
using TokenList = std::vector<Token>;

/// Set of lowercase function words removed before entity recognition.
class StopWordList {
 public:
  StopWordList() = default;
  explicit StopWordList(std::set<std::string> words) : words_(std::move(words)) {}

  /// The list compiled into the library (mirrors data/stopwords.txt).
  static const StopWordList& builtin();

  /// Parses one word per line; blank lines and `#` comments are ignored.
  static StopWordList parse(std::istream& in);

  bool contains(std::string_view word) const { return words_.find(std::string(word)) != words_.end(); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::set<std::string>& words() const noexcept { return words_; }

  friend bool operator==(const StopWordList&, const StopWordList&) = default;

 private:
  std::set<std::string> words_;
};

/// Splits on whitespace, lowercases ASCII letters, strips punctuation and digits,
/// and drops tokens left empty. Duplicates are kept.
TokenList tokenize(std::string_view text);

/// Rule-table lemmatizer for plural and third-person -s/-es/-ies endings.
Token lemmatize(const Token& token);

/// Porter2 (Snowball English) suffix stripping, iterated to a fixed point so
/// that stem(stem(t)) == stem(t).
Token stem(const Token& token);

/// Single application of Porter2 without the fixed-point iteration.
Token porter2(const Token& token);

TokenList remove_stop_words(const TokenList& tokens, const StopWordList& stop_words = StopWordList::builtin());

/// tokenize, then lemmatize and stem every token. Stop words are retained.
TokenList preprocess_for_intent(std::string_view text);

/// tokenize, then drop stop words. Surface forms are not stemmed.
TokenList preprocess_for_ner(std::string_view text, const StopWordList& stop_words = StopWordList::builtin());

}  // namespace chatbot

#endif  // CHATBOT_TEXT_PIPELINE_HPP_
