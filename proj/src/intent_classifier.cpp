#include "chatbot/intent_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chatbot/random.hpp"

namespace chatbot {

IntentModel::IntentModel(Mlp mlp) : mlp_(std::move(mlp)), vocabulary_(mlp_.features) {
  if (mlp_.network.input_size() != static_cast<Eigen::Index>(vocabulary_.size())) {
    throw CorruptModel("intent model input size does not match its vocabulary");
  }
  if (mlp_.network.output_size() != static_cast<Eigen::Index>(mlp_.labels.size())) {
    throw CorruptModel("intent model output size does not match its intent codec");
  }
}

void IntentModel::set_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidConfig("intent threshold must lie in (0, 1)");
  mlp_.info.threshold = threshold;
}

IntentModel IntentModel::load(const std::string& path) {
  Mlp mlp = load_model_file(path);
  if (mlp.info.kind != "intent") throw CorruptModel("'" + path + "' holds a " + mlp.info.kind + " model, not an intent model");
  return IntentModel(std::move(mlp));
}

std::pair<std::vector<InputExample>, std::vector<InputExample>> stratified_split(
    const std::vector<InputExample>& examples, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidConfig("test_fraction must lie in (0, 1)");

  std::vector<std::string> intents;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& list = members[examples[i].intent];
    if (list.empty()) intents.push_back(examples[i].intent);
    list.push_back(i);
  }
  if (intents.empty()) throw InsufficientExamples("no examples to split");

  Rng rng(seed);
  std::vector<bool> is_test(examples.size(), false);
  for (const auto& intent : intents) {
    auto idx = members[intent];
    const auto n = static_cast<long>(idx.size());
    if (n < 2) {
      throw InsufficientExamples("intent \"" + intent + "\" has " + std::to_string(n) +
                                 " example(s); a stratified split needs at least 2");
    }
    const long n_test = std::clamp(std::lround(static_cast<double>(n) * test_fraction), 1L, n - 1);
    rng.shuffle(idx);
    for (long k = 0; k < n_test; ++k) is_test[idx[static_cast<std::size_t>(k)]] = true;
  }

  std::pair<std::vector<InputExample>, std::vector<InputExample>> out;
  for (std::size_t i = 0; i < examples.size(); ++i) (is_test[i] ? out.second : out.first).push_back(examples[i]);
  return out;
}

namespace {

Eigen::MatrixXd to_features(const CountMatrix& counts) { return counts.cast<double>(); }

}  // namespace

IntentTrainingResult train_intent_model(const KnowledgeBase& kb, MlpConfig config, double test_fraction,
                                        std::uint64_t seed, double threshold) {
  auto [train_set, test_set] = stratified_split(kb.inputs, test_fraction, seed);

  std::vector<std::string> train_intents;
  for (const auto& ex : train_set) train_intents.push_back(ex.intent);
  const LabelCodec codec = LabelCodec::from_observed(train_intents);
  const TermDocumentMatrix train_tdm = build_term_document_matrix(train_set, codec);
  const TermDocumentMatrix test_tdm = build_term_document_matrix(test_set, train_tdm.vocabulary, codec);

  config.layer_sizes[0] = static_cast<int>(train_tdm.vocabulary.size());
  config.layer_sizes[3] = static_cast<int>(codec.size());
  config.seed = seed;

  Mlp mlp = init_mlp(config);
  mlp.labels = codec;
  mlp.features = train_tdm.vocabulary.terms();
  mlp.info = {"intent", threshold};

  const Eigen::MatrixXd train_x = to_features(train_tdm.counts);
  const Eigen::MatrixXd test_x = to_features(test_tdm.counts);
  auto [trained, report] = train(std::move(mlp), train_x, train_tdm.labels, Eigen::MatrixXd(0, train_x.cols()), {});

  IntentTrainingResult result;
  result.train_accuracy = accuracy(trained, train_x, train_tdm.labels);
  result.test_accuracy = accuracy(trained, test_x, test_tdm.labels);
  result.train_size = train_set.size();
  result.test_size = test_set.size();
  result.report = std::move(report);
  result.model = IntentModel(std::move(trained));
  result.model.set_threshold(threshold);
  return result;
}

Eigen::RowVectorXd intent_features(const IntentModel& model, std::string_view text) {
  return vectorize_message(preprocess_for_intent(text), model.vocabulary()).cast<double>();
}

IntentPrediction classify(const IntentModel& model, std::string_view text) {
  IntentPrediction out;
  out.distribution = forward(model.mlp(), intent_features(model, text));
  const auto best = argmax(out.distribution);
  out.probability = out.distribution(best);
  out.fallback = out.probability < model.threshold();
  if (!out.fallback) out.intent = model.codec().decode(static_cast<int>(best));
  return out;
}

}  // namespace chatbot
