#include "chatbot/entity_recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chatbot/random.hpp"

namespace chatbot {

NerModel::NerModel(Mlp mlp) : mlp_(std::move(mlp)), alphabet_(CharAlphabet::from_strings(mlp_.features)) {
  if (mlp_.labels != LabelCodec::entity_types()) throw CorruptModel("NER model codec must be LOC, MISC, ORG, PER");
  if (mlp_.network.input_size() != static_cast<Eigen::Index>(alphabet_.size())) {
    throw CorruptModel("NER model input size does not match its alphabet");
  }
}

void NerModel::set_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidConfig("NER threshold must lie in (0, 1)");
  mlp_.info.threshold = threshold;
}

NerModel NerModel::load(const std::string& path) {
  Mlp mlp = load_model_file(path);
  if (mlp.info.kind != "ner") throw CorruptModel("'" + path + "' holds a " + mlp.info.kind + " model, not a NER model");
  return NerModel(std::move(mlp));
}

namespace {

NerTrainingResult fit(const std::vector<LabeledWord>& train_set, const std::vector<LabeledWord>& validation_set,
                      MlpConfig config, double threshold) {
  const LabelCodec codec = LabelCodec::entity_types();
  const CharCountMatrix train_m = build_char_count_matrix(train_set, codec);
  const CharCountMatrix valid_m = build_char_count_matrix(validation_set, train_m.alphabet, codec);

  config.layer_sizes[0] = static_cast<int>(train_m.alphabet.size());
  config.layer_sizes[3] = static_cast<int>(codec.size());
  Mlp mlp = init_mlp(config);
  mlp.labels = codec;
  mlp.features = train_m.alphabet.as_strings();
  mlp.info = {"ner", threshold};

  auto [trained, report] = train(std::move(mlp), train_m.counts.cast<double>(), train_m.labels,
                                 valid_m.counts.cast<double>(), valid_m.labels);
  NerTrainingResult result;
  result.report = std::move(report);
  result.model = NerModel(std::move(trained));
  result.model.set_threshold(threshold);
  result.train_size = train_set.size();
  result.validation_size = validation_set.size();
  return result;
}

}  // namespace

NerTrainingResult train_ner_from_kb(const KnowledgeBase& kb, MlpConfig config, double threshold) {
  const auto inventory = entity_inventory(kb);
  if (inventory.empty()) throw EmptyEntityInventory("the knowledge base has no entity bindings");

  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < inventory.size(); ++i) by_type[inventory[i].entity_type].push_back(i);

  Rng rng(config.seed);
  std::vector<bool> is_valid(inventory.size(), false);
  for (const auto type : kEntityTypes) {
    auto it = by_type.find(std::string(type));
    if (it == by_type.end()) continue;
    auto idx = it->second;
    const auto n = static_cast<long>(idx.size());
    const long n_valid = std::clamp(std::lround(static_cast<double>(n) * kKbValidationFraction), 0L, n - 1);
    rng.shuffle(idx);
    for (long k = 0; k < n_valid; ++k) is_valid[idx[static_cast<std::size_t>(k)]] = true;
  }

  std::vector<LabeledWord> train_set, validation_set;
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    LabeledWord w{inventory[i].value, inventory[i].entity_type};
    (is_valid[i] ? validation_set : train_set).push_back(std::move(w));
  }
  return fit(train_set, validation_set, config, threshold);
}

NerTrainingResult train_ner_from_conll(const std::vector<LabeledWord>& train_set,
                                       const std::vector<LabeledWord>& validation_set, MlpConfig config,
                                       double threshold) {
  if (train_set.empty()) throw EmptyDataset("CoNLL training set has no entity words");
  return fit(train_set, validation_set, config, threshold);
}

WordClassification classify_word(const NerModel& model, std::string_view word) {
  WordClassification out;
  out.distribution = forward(model.mlp(), Eigen::RowVectorXd(char_count_vector(word, model.alphabet()).cast<double>()));
  const auto best = argmax(out.distribution);
  out.entity_type = model.codec().decode(static_cast<int>(best));
  out.probability = out.distribution(best);
  return out;
}

std::vector<EntityPrediction> recognize(const NerModel& model, std::string_view text) {
  std::vector<EntityPrediction> found;
  for (const auto& word : preprocess_for_ner(text)) {
    auto c = classify_word(model, word);
    if (c.probability >= model.threshold()) found.push_back({word, std::move(c.entity_type), c.probability});
  }
  return found;
}

}  // namespace chatbot
