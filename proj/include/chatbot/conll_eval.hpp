#ifndef CHATBOT_CONLL_EVAL_HPP_
#define CHATBOT_CONLL_EVAL_HPP_

#include <Eigen/Core>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chatbot/entity_recognizer.hpp"
#include "chatbot/vectorizers.hpp"

namespace chatbot {

struct ConllToken {
  std::string surface;
  std::string ner_tag;  ///< "O" or B-/I- followed by LOC, MISC, ORG or PER

  friend bool operator==(const ConllToken&, const ConllToken&) = default;
};

/// Reads the shared-task column format: surface first, NER tag last, blank
/// lines between sentences, -DOCSTART- lines skipped.
/// Throws MalformedLine (with 1-based line number) or UnknownTag.
std::vector<ConllToken> parse_conll(std::istream& stream);
std::vector<ConllToken> parse_conll_file(const std::string& path);

/// Non-O tokens, lowercased, with the B-/I- prefix stripped. Duplicates kept.
std::vector<LabeledWord> extract_entity_words(const std::vector<ConllToken>& tokens);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Rows are gold classes, columns are predicted classes.
using ConfusionMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EvalReport {
  std::vector<std::string> labels;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> per_class;
  ClassMetrics weighted;  ///< support-weighted means
  ClassMetrics macro;     ///< unweighted means
  double accuracy = 0.0;

  friend bool operator==(const EvalReport& a, const EvalReport& b) {
    return a.labels == b.labels && a.confusion.rows() == b.confusion.rows() &&
           a.confusion.cols() == b.confusion.cols() && a.confusion == b.confusion && a.per_class == b.per_class &&
           a.weighted == b.weighted && a.macro == b.macro && a.accuracy == b.accuracy;
  }
};

/// Metrics from aligned gold/predicted codes in [0, labels.size()).
/// Undefined ratios (0/0) are reported as 0. Throws EmptyDataset.
EvalReport compute_report(std::span<const int> gold, std::span<const int> predicted,
                          const std::vector<std::string>& labels);

/// Scores every gold word by argmax, bypassing the recognition threshold.
EvalReport evaluate(const NerModel& model, const std::vector<LabeledWord>& gold);

enum class ReportFormat { text, json };

std::string render_report(const EvalReport& report, ReportFormat format);
/// Inverse of the json rendering.
EvalReport report_from_json(std::string_view json_text);

}  // namespace chatbot

#endif  // CHATBOT_CONLL_EVAL_HPP_
