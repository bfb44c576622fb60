#include <gtest/gtest.h>

#include <map>

#include "chatbot/errors.hpp"
#include "chatbot/knowledge_base.hpp"
#include "chatbot/text_pipeline.hpp"
#include "chatbot/vectorizers.hpp"
#include "test_support.hpp"

namespace chatbot {
namespace {

// Columns of Table 1 / Table 2 as printed; the dotted middle columns are not
// displayed and so carry no expectation.
const std::vector<std::string> kTableOneColumns = {"please", "are", "need", "which", "how", "taxi", "rate",
                                                   "you",    "your", "in", "name", "what"};

const std::vector<std::vector<int>> kTableOneRows = {
    {0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0},  // utter_greetings
    {0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1},  // request_name
    {0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1},  // request_rate
    {1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0},  // request_docs
};

// Header words go through the same pipeline as messages ("please" -> "pleas").
int column_of(const Vocabulary& vocab, const std::string& header) {
  const auto processed = preprocess_for_intent(header);
  EXPECT_EQ(processed.size(), 1u) << header;
  const auto idx = vocab.index_of(processed.front());
  EXPECT_TRUE(idx.has_value()) << header << " -> " << processed.front();
  return idx.value_or(-1);
}

TEST(GoldenTable1, TermDocumentMatrixCells) {
  const KnowledgeBase kb = load_kb(std::string_view(testing::kTableOneKb));
  const auto codec = LabelCodec::from_observed(intent_inventory(kb));
  const auto tdm = build_term_document_matrix(kb.inputs, codec);
  ASSERT_EQ(tdm.counts.rows(), 5);
  for (std::size_t r = 0; r < kTableOneRows.size(); ++r) {
    for (std::size_t c = 0; c < kTableOneColumns.size(); ++c) {
      const int col = column_of(tdm.vocabulary, kTableOneColumns[c]);
      ASSERT_GE(col, 0);
      EXPECT_EQ(tdm.counts(static_cast<Eigen::Index>(r), col), kTableOneRows[r][c])
          << "row " << r + 1 << " column " << kTableOneColumns[c];
    }
  }
  // The last column of Table 1: one distinct label per displayed row.
  const std::vector<std::string> intents = {"utter_greetings", "request_name", "request_rate", "request_docs"};
  for (std::size_t r = 0; r < intents.size(); ++r) EXPECT_EQ(codec.decode(tdm.labels[r]), intents[r]);
  EXPECT_EQ(std::set<int>(tdm.labels.begin(), tdm.labels.begin() + 4).size(), 4u);
}

TEST(GoldenTable2, SentenceVector) {
  const KnowledgeBase kb = load_kb(std::string_view(testing::kTableOneKb));
  const auto tdm = build_term_document_matrix(kb.inputs, LabelCodec::from_observed(intent_inventory(kb)));
  const CountVector v = vectorize_message(preprocess_for_intent("How are you?"), tdm.vocabulary);
  ASSERT_EQ(v.size(), static_cast<Eigen::Index>(tdm.vocabulary.size()));
  const std::vector<int> expected = {0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0};
  for (std::size_t c = 0; c < kTableOneColumns.size(); ++c) {
    EXPECT_EQ(v(column_of(tdm.vocabulary, kTableOneColumns[c])), expected[c]) << kTableOneColumns[c];
  }
  EXPECT_EQ(v.sum(), 3);  // all else zero
  EXPECT_EQ(vectorize_message({}, tdm.vocabulary).sum(), 0);
}

// Displayed letter columns of Tables 3 and 4.
const std::string kShownLetters = "abcdefguvwxyz";

CharAlphabet a_to_z() {
  std::u32string s;
  for (char32_t c = U'a'; c <= U'z'; ++c) s += c;
  return CharAlphabet(s);
}

void expect_letter_row(const CountVector& v, const CharAlphabet& alphabet, const std::vector<int>& expected,
                       const std::string& what) {
  for (std::size_t i = 0; i < kShownLetters.size(); ++i) {
    const auto idx = alphabet.index_of(static_cast<char32_t>(kShownLetters[i]));
    const int got = idx ? v(*idx) : 0;  // a character outside the alphabet counts as a zero column
    EXPECT_EQ(got, expected[i]) << what << " column " << kShownLetters[i];
  }
}

const std::vector<std::pair<std::string, std::vector<int>>> kTableThree = {
    {"Islamabad", {3, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
    {"Karachi", {2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
    {"Taxi", {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0}},
    {"HiveWorx", {0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0}},
};
const std::vector<std::string> kTableThreeTypes = {"LOC", "LOC", "MISC", "ORG"};

TEST(GoldenTable3, CharacterCountsOverFixedAlphabet) {
  std::vector<LabeledWord> words;
  for (std::size_t i = 0; i < kTableThree.size(); ++i) words.push_back({kTableThree[i].first, kTableThreeTypes[i]});
  const auto alphabet = a_to_z();
  const auto m = build_char_count_matrix(words, alphabet, LabelCodec::entity_types());
  for (std::size_t r = 0; r < kTableThree.size(); ++r) {
    expect_letter_row(m.counts.row(static_cast<Eigen::Index>(r)), alphabet, kTableThree[r].second,
                      kTableThree[r].first);
    EXPECT_EQ(LabelCodec::entity_types().decode(m.labels[r]), kTableThreeTypes[r]);
  }
}

TEST(GoldenTable3, CharacterCountsOverObservedAlphabet) {
  std::vector<LabeledWord> words;
  for (std::size_t i = 0; i < kTableThree.size(); ++i) words.push_back({kTableThree[i].first, kTableThreeTypes[i]});
  const auto m = build_char_count_matrix(words, LabelCodec::entity_types());
  // Observed alphabet in first-appearance order of the lowercased values.
  EXPECT_EQ(m.alphabet.chars(), U"islambdkrchtxvewo");
  for (std::size_t r = 0; r < kTableThree.size(); ++r) {
    expect_letter_row(m.counts.row(static_cast<Eigen::Index>(r)), m.alphabet, kTableThree[r].second,
                      kTableThree[r].first);
    EXPECT_EQ(m.counts.row(static_cast<Eigen::Index>(r)).sum(), static_cast<int>(kTableThree[r].first.size()));
  }
}

TEST(GoldenTable4, SentenceCharacterMatrix) {
  const auto words = preprocess_for_ner("What is the taxi rate in Islamabad?");
  ASSERT_EQ(words, (std::vector<std::string>{"taxi", "rate", "islamabad"}));
  const std::vector<std::vector<int>> expected = {
      {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0},
      {1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0},
      {3, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
  };
  const auto fixed = a_to_z();
  const auto observed = build_char_alphabet({"Islamabad", "Karachi", "Taxi", "HiveWorx"});
  for (std::size_t r = 0; r < words.size(); ++r) {
    expect_letter_row(char_count_vector(words[r], fixed), fixed, expected[r], words[r]);
    expect_letter_row(char_count_vector(words[r], observed), observed, expected[r], words[r]);
  }
}

TEST(Vocabulary, FirstAppearanceOrderAndUnknownTermsIgnored) {
  const auto vocab = build_vocabulary({{"b", "a", "b"}, {"c", "a"}});
  EXPECT_EQ(vocab.terms(), (std::vector<std::string>{"b", "a", "c"}));
  const CountVector v = vectorize_message({"a", "a", "zzz", "c"}, vocab);
  EXPECT_EQ(v(0), 0);
  EXPECT_EQ(v(1), 2);
  EXPECT_EQ(v(2), 1);
  EXPECT_THROW(build_vocabulary({}), EmptyCorpus);
  EXPECT_THROW(build_vocabulary({{}, {}}), EmptyCorpus);
}

TEST(LabelCodec, RoundTripAndErrors) {
  const auto codec = LabelCodec::from_observed({"x", "y", "x", "z"});
  EXPECT_EQ(codec.labels(), (std::vector<std::string>{"x", "y", "z"}));
  for (int c = 0; c < 3; ++c) EXPECT_EQ(codec.encode(codec.decode(c)), c);
  EXPECT_THROW(codec.encode("w"), UnknownLabel);
  EXPECT_THROW(codec.decode(3), CodeOutOfRange);
  EXPECT_THROW(codec.decode(-1), CodeOutOfRange);
  EXPECT_EQ(LabelCodec::entity_types().labels(), (std::vector<std::string>{"LOC", "MISC", "ORG", "PER"}));
}

TEST(CharAlphabet, AnagramsShareAVector) {
  const auto alphabet = build_char_alphabet({"Amna", "Anam", "Islamabad"});
  EXPECT_EQ(char_count_vector("amna", alphabet), char_count_vector("anam", alphabet));
  EXPECT_EQ(char_count_vector("AMNA", alphabet), char_count_vector("anam", alphabet));
  EXPECT_THROW(build_char_alphabet({}), EmptyCorpus);
}

TEST(CharAlphabet, StringRoundTripKeepsNonAscii) {
  const auto alphabet = build_char_alphabet({"Zürich", "Ünal"});
  EXPECT_EQ(CharAlphabet::from_strings(alphabet.as_strings()), alphabet);
  EXPECT_TRUE(alphabet.index_of(U'ü').has_value());
}

}  // namespace
}  // namespace chatbot
