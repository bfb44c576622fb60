#include "chatbot/vectorizers.hpp"

#include "chatbot/errors.hpp"
#include "chatbot/utf8.hpp"

namespace chatbot {

LabelCodec::LabelCodec(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw InvalidConfig("duplicate label \"" + labels_[i] + "\" in codec");
    }
  }
}

LabelCodec LabelCodec::from_observed(const std::vector<std::string>& labels) {
  std::vector<std::string> distinct;
  std::unordered_map<std::string, int> seen;
  for (const auto& l : labels) {
    if (seen.emplace(l, 0).second) distinct.push_back(l);
  }
  return LabelCodec(std::move(distinct));
}

LabelCodec LabelCodec::entity_types() {
  return LabelCodec(std::vector<std::string>(kEntityTypes.begin(), kEntityTypes.end()));
}

int LabelCodec::encode(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) throw UnknownLabel("label \"" + std::string(label) + "\" is not in the codec");
  return it->second;
}

const std::string& LabelCodec::decode(int code) const {
  if (code < 0 || static_cast<std::size_t>(code) >= labels_.size()) {
    throw CodeOutOfRange("code " + std::to_string(code) + " outside [0, " + std::to_string(labels_.size()) + ")");
  }
  return labels_[static_cast<std::size_t>(code)];
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<int>(i)).second) {
      throw InvalidConfig("duplicate vocabulary term \"" + terms_[i] + "\"");
    }
  }
}

std::optional<int> Vocabulary::index_of(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CharAlphabet::CharAlphabet(std::u32string chars) : chars_(std::move(chars)) {
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    if (!index_.emplace(chars_[i], static_cast<int>(i)).second) {
      throw InvalidConfig("duplicate character in alphabet");
    }
  }
}

std::optional<int> CharAlphabet::index_of(char32_t c) const {
  const auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> CharAlphabet::as_strings() const {
  std::vector<std::string> out;
  out.reserve(chars_.size());
  for (char32_t c : chars_) out.push_back(utf8::encode(c));
  return out;
}

CharAlphabet CharAlphabet::from_strings(const std::vector<std::string>& chars) {
  std::u32string decoded;
  for (const auto& s : chars) {
    const auto cps = utf8::decode(s);
    if (cps.size() != 1) throw CorruptModel("alphabet entry \"" + s + "\" is not a single character");
    decoded.push_back(cps.front());
  }
  return CharAlphabet(std::move(decoded));
}

Vocabulary build_vocabulary(const std::vector<TokenList>& messages) {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int> seen;
  for (const auto& message : messages) {
    for (const auto& token : message) {
      if (seen.emplace(token, 0).second) terms.push_back(token);
    }
  }
  if (terms.empty()) throw EmptyCorpus("no tokens found in the training messages");
  return Vocabulary(std::move(terms));
}

CountVector vectorize_message(const TokenList& tokens, const Vocabulary& vocab) {
  CountVector v = CountVector::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& token : tokens) {
    if (const auto j = vocab.index_of(token)) ++v(*j);
  }
  return v;
}

TermDocumentMatrix build_term_document_matrix(const std::vector<InputExample>& inputs, const LabelCodec& codec) {
  if (inputs.empty()) throw EmptyCorpus("no input examples");
  std::vector<TokenList> tokens;
  tokens.reserve(inputs.size());
  for (const auto& ex : inputs) tokens.push_back(preprocess_for_intent(ex.message));
  Vocabulary vocab = build_vocabulary(tokens);

  TermDocumentMatrix tdm;
  tdm.counts.resize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    tdm.counts.row(static_cast<Eigen::Index>(i)) = vectorize_message(tokens[i], vocab);
    tdm.labels.push_back(codec.encode(inputs[i].intent));
  }
  tdm.vocabulary = std::move(vocab);
  return tdm;
}

TermDocumentMatrix build_term_document_matrix(const std::vector<InputExample>& inputs, const Vocabulary& vocab,
                                              const LabelCodec& codec) {
  TermDocumentMatrix tdm;
  tdm.vocabulary = vocab;
  tdm.counts.resize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    tdm.counts.row(static_cast<Eigen::Index>(i)) = vectorize_message(preprocess_for_intent(inputs[i].message), vocab);
    tdm.labels.push_back(codec.encode(inputs[i].intent));
  }
  return tdm;
}

CharAlphabet build_char_alphabet(const std::vector<std::string>& values) {
  if (values.empty()) throw EmptyCorpus("no entity values to build a character alphabet from");
  std::u32string chars;
  std::unordered_map<char32_t, int> seen;
  for (const auto& value : values) {
    for (char32_t c : utf8::decode(value)) {
      c = utf8::ascii_lower(c);
      if (seen.emplace(c, 0).second) chars.push_back(c);
    }
  }
  if (chars.empty()) throw EmptyCorpus("entity values contain no characters");
  return CharAlphabet(std::move(chars));
}

CountVector char_count_vector(std::string_view word, const CharAlphabet& alphabet) {
  CountVector v = CountVector::Zero(static_cast<Eigen::Index>(alphabet.size()));
  for (char32_t c : utf8::decode(word)) {
    if (const auto j = alphabet.index_of(utf8::ascii_lower(c))) ++v(*j);
  }
  return v;
}

CharCountMatrix build_char_count_matrix(const std::vector<LabeledWord>& words, const LabelCodec& codec) {
  std::vector<std::string> values;
  values.reserve(words.size());
  for (const auto& w : words) values.push_back(w.word);
  return build_char_count_matrix(words, build_char_alphabet(values), codec);
}

CharCountMatrix build_char_count_matrix(const std::vector<LabeledWord>& words, const CharAlphabet& alphabet,
                                        const LabelCodec& codec) {
  CharCountMatrix m;
  m.alphabet = alphabet;
  m.counts.resize(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(alphabet.size()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    m.counts.row(static_cast<Eigen::Index>(i)) = char_count_vector(words[i].word, alphabet);
    m.labels.push_back(codec.encode(words[i].entity_type));
  }
  return m;
}

}  // namespace chatbot
