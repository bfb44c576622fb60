#include "chatbot/conll_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chatbot {
namespace {

bool valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') return false;
  return is_entity_type(tag.substr(2));
}

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return s;
}

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

double harmonic(double p, double r) { return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

ClassMetrics metrics_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
          j.at("support").get<long>()};
}

}  // namespace

std::vector<ConllToken> parse_conll(std::istream& stream) {
  std::vector<ConllToken> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream cols(line);
    std::vector<std::string> fields;
    for (std::string f; cols >> f;) fields.push_back(std::move(f));
    if (fields.empty()) continue;
    if (fields.front() == "-DOCSTART-") continue;
    if (fields.size() < 2) {
      throw MalformedLine("line " + std::to_string(line_no) + ": expected at least 2 columns, found " +
                          std::to_string(fields.size()));
    }
    if (!valid_tag(fields.back())) {
      throw UnknownTag("line " + std::to_string(line_no) + ": unknown NER tag \"" + fields.back() + "\"");
    }
    tokens.push_back({std::move(fields.front()), std::move(fields.back())});
  }
  return tokens;
}

std::vector<ConllToken> parse_conll_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open CoNLL file '" + path + "'");
  return parse_conll(in);
}

std::vector<LabeledWord> extract_entity_words(const std::vector<ConllToken>& tokens) {
  std::vector<LabeledWord> words;
  for (const auto& t : tokens) {
    if (t.ner_tag == "O") continue;
    words.push_back({ascii_lower(t.surface), t.ner_tag.substr(2)});
  }
  return words;
}

EvalReport compute_report(std::span<const int> gold, std::span<const int> predicted,
                          const std::vector<std::string>& labels) {
  if (gold.empty()) throw EmptyDataset("no gold samples to evaluate");
  if (gold.size() != predicted.size()) throw DimensionMismatch("gold and predicted lengths differ");
  const auto k = static_cast<Eigen::Index>(labels.size());

  EvalReport r;
  r.labels = labels;
  r.confusion = ConfusionMatrix::Zero(k, k);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw CodeOutOfRange("class code outside [0, " + std::to_string(k) + ")");
    }
    ++r.confusion(gold[i], predicted[i]);
  }

  const long total = static_cast<long>(gold.size());
  long correct = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const long tp = r.confusion(c, c);
    const long gold_c = r.confusion.row(c).sum();
    const long pred_c = r.confusion.col(c).sum();
    ClassMetrics m;
    m.precision = ratio(tp, pred_c);
    m.recall = ratio(tp, gold_c);
    m.f1 = harmonic(m.precision, m.recall);
    m.support = gold_c;
    r.per_class.push_back(m);
    correct += tp;

    r.weighted.precision += static_cast<double>(gold_c) * m.precision;
    r.weighted.recall += static_cast<double>(gold_c) * m.recall;
    r.weighted.f1 += static_cast<double>(gold_c) * m.f1;
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
  }
  r.weighted.precision /= static_cast<double>(total);
  r.weighted.recall /= static_cast<double>(total);
  r.weighted.f1 /= static_cast<double>(total);
  r.weighted.support = total;
  r.macro.precision /= static_cast<double>(k);
  r.macro.recall /= static_cast<double>(k);
  r.macro.f1 /= static_cast<double>(k);
  r.macro.support = total;
  r.accuracy = ratio(correct, total);
  return r;
}

EvalReport evaluate(const NerModel& model, const std::vector<LabeledWord>& gold) {
  if (gold.empty()) throw EmptyDataset("no gold entity words to evaluate");
  const CharCountMatrix m = build_char_count_matrix(gold, model.alphabet(), model.codec());
  const Eigen::MatrixXd probabilities = forward_rows(model.mlp(), m.counts.cast<double>());
  std::vector<int> predicted(gold.size());
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    predicted[static_cast<std::size_t>(i)] = static_cast<int>(argmax(probabilities.row(i)));
  }
  return compute_report(m.labels, predicted, model.codec().labels());
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::json j;
    j["labels"] = report.labels;
    j["per_class"] = nlohmann::json::object();
    for (std::size_t c = 0; c < report.labels.size(); ++c) j["per_class"][report.labels[c]] = metrics_json(report.per_class[c]);
    j["weighted_avg"] = metrics_json(report.weighted);
    j["macro_avg"] = metrics_json(report.macro);
    j["accuracy"] = report.accuracy;
    j["confusion"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
      std::vector<long> row(report.confusion.row(r).begin(), report.confusion.row(r).end());
      j["confusion"].push_back(row);
    }
    return j.dump(2) + "\n";
  }

  std::size_t width = std::string("weighted avg").size();
  for (const auto& l : report.labels) width = std::max(width, l.size());
  std::ostringstream out;
  out << std::string(width, ' ') << "    prec  recall      f1  support\n\n";
  const auto row = [&](const std::string& name, const ClassMetrics& m) {
    out << pad_left(name, width) << "  " << fixed4(m.precision) << "  " << fixed4(m.recall) << "  " << fixed4(m.f1)
        << "  " << pad_left(std::to_string(m.support), 7) << '\n';
  };
  for (std::size_t c = 0; c < report.labels.size(); ++c) row(report.labels[c], report.per_class[c]);
  out << '\n';
  out << pad_left("accuracy", width) << "  " << std::string(6, ' ') << "  " << std::string(6, ' ') << "  "
      << fixed4(report.accuracy) << "  " << pad_left(std::to_string(report.weighted.support), 7) << '\n';
  row("macro avg", report.macro);
  row("weighted avg", report.weighted);

  std::size_t cell = 6;
  for (const auto& l : report.labels) cell = std::max(cell, l.size());
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) {
      cell = std::max(cell, std::to_string(report.confusion(r, c)).size());
    }
  }
  out << "\nconfusion matrix (rows = gold, columns = predicted)\n";
  out << std::string(width, ' ');
  for (const auto& l : report.labels) out << "  " << pad_left(l, cell);
  out << '\n';
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    out << pad_left(report.labels[static_cast<std::size_t>(r)], width);
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) {
      out << "  " << pad_left(std::to_string(report.confusion(r, c)), cell);
    }
    out << '\n';
  }
  return out.str();
}

EvalReport report_from_json(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  EvalReport r;
  r.labels = j.at("labels").get<std::vector<std::string>>();
  for (const auto& l : r.labels) r.per_class.push_back(metrics_from_json(j.at("per_class").at(l)));
  r.weighted = metrics_from_json(j.at("weighted_avg"));
  r.macro = metrics_from_json(j.at("macro_avg"));
  r.accuracy = j.at("accuracy").get<double>();
  const auto k = static_cast<Eigen::Index>(r.labels.size());
  r.confusion = ConfusionMatrix::Zero(k, k);
  const auto& rows = j.at("confusion");
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) r.confusion(a, b) = rows.at(a).at(b).get<long>();
  }
  return r;
}

}  // namespace chatbot
