#ifndef CHATBOT_VECTORIZERS_HPP_
#define CHATBOT_VECTORIZERS_HPP_

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chatbot/knowledge_base.hpp"
#include "chatbot/text_pipeline.hpp"

namespace chatbot {

/// Integer feature rows, one sample per row.
using CountMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVector = Eigen::Matrix<int, 1, Eigen::Dynamic>;

/// Bijective label <-> code mapping with codes in [0, K).
class LabelCodec {
 public:
  LabelCodec() = default;
  /// Labels must be distinct; their order defines the codes.
  explicit LabelCodec(std::vector<std::string> labels);

  /// Distinct labels in first-appearance order.
  static LabelCodec from_observed(const std::vector<std::string>& labels);
  /// The fixed four-class entity codec {LOC, MISC, ORG, PER}.
  static LabelCodec entity_types();

  int encode(std::string_view label) const;
  const std::string& decode(int code) const;
  bool contains(std::string_view label) const { return index_.count(std::string(label)) != 0; }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelCodec& a, const LabelCodec& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

/// Unique terms in first-appearance order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::optional<int> index_of(std::string_view term) const;
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> index_;
};

/// Unique lowercased characters observed in training entity values.
class CharAlphabet {
 public:
  CharAlphabet() = default;
  explicit CharAlphabet(std::u32string chars);

  std::optional<int> index_of(char32_t c) const;
  std::size_t size() const noexcept { return chars_.size(); }
  const std::u32string& chars() const noexcept { return chars_; }
  /// Each character as its own UTF-8 string, in index order.
  std::vector<std::string> as_strings() const;
  static CharAlphabet from_strings(const std::vector<std::string>& chars);

  friend bool operator==(const CharAlphabet& a, const CharAlphabet& b) { return a.chars_ == b.chars_; }

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, int> index_;
};

struct TermDocumentMatrix {
  Vocabulary vocabulary;
  CountMatrix counts;
  std::vector<int> labels;
};

struct CharCountMatrix {
  CharAlphabet alphabet;
  CountMatrix counts;
  std::vector<int> labels;
};

/// Throws EmptyCorpus when the messages contain no tokens at all.
Vocabulary build_vocabulary(const std::vector<TokenList>& messages);

/// v[j] = multiplicity of term j; out-of-vocabulary tokens are ignored.
CountVector vectorize_message(const TokenList& tokens, const Vocabulary& vocab);

/// Builds the vocabulary from `inputs` and one count row per input.
TermDocumentMatrix build_term_document_matrix(const std::vector<InputExample>& inputs, const LabelCodec& codec);
/// Vectorizes `inputs` against an existing vocabulary (held-out data).
TermDocumentMatrix build_term_document_matrix(const std::vector<InputExample>& inputs, const Vocabulary& vocab,
                                              const LabelCodec& codec);

/// Throws EmptyCorpus for an empty list.
CharAlphabet build_char_alphabet(const std::vector<std::string>& values);

/// Lowercases `word` and counts each alphabet character; others are ignored.
CountVector char_count_vector(std::string_view word, const CharAlphabet& alphabet);

/// A word with its gold entity type.
struct LabeledWord {
  std::string word;
  std::string entity_type;

  friend bool operator==(const LabeledWord&, const LabeledWord&) = default;
};

CharCountMatrix build_char_count_matrix(const std::vector<LabeledWord>& words, const LabelCodec& codec);
CharCountMatrix build_char_count_matrix(const std::vector<LabeledWord>& words, const CharAlphabet& alphabet,
                                        const LabelCodec& codec);

}  // namespace chatbot

#endif  // CHATBOT_VECTORIZERS_HPP_
