#ifndef CHATBOT_ENTITY_RECOGNIZER_HPP_
#define CHATBOT_ENTITY_RECOGNIZER_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chatbot/knowledge_base.hpp"
#include "chatbot/neural_net.hpp"
#include "chatbot/text_pipeline.hpp"
#include "chatbot/vectorizers.hpp"

namespace chatbot {

inline constexpr double kDefaultNerThreshold = 0.5;
inline constexpr double kKbValidationFraction = 0.1;

/// Character-count word classifier over {LOC, MISC, ORG, PER}.
class NerModel {
 public:
  NerModel() = default;
  explicit NerModel(Mlp mlp);

  const Mlp& mlp() const noexcept { return mlp_; }
  const CharAlphabet& alphabet() const noexcept { return alphabet_; }
  const LabelCodec& codec() const noexcept { return mlp_.labels; }
  double threshold() const noexcept { return mlp_.info.threshold; }
  void set_threshold(double threshold);

  void save(const std::string& path) const { save_model_file(mlp_, path); }
  static NerModel load(const std::string& path);

 private:
  Mlp mlp_;
  CharAlphabet alphabet_;
};

struct EntityPrediction {
  Token word;
  std::string entity_type;
  double probability = 0.0;

  friend bool operator==(const EntityPrediction&, const EntityPrediction&) = default;
};

struct WordClassification {
  std::string entity_type;
  double probability = 0.0;
  Eigen::RowVectorXd distribution;
};

struct NerTrainingResult {
  NerModel model;
  TrainReport report;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

/// Trains on entity_inventory(kb) with a 10% validation slice stratified by
/// entity type. Throws EmptyEntityInventory.
NerTrainingResult train_ner_from_kb(const KnowledgeBase& kb, MlpConfig config,
                                    double threshold = kDefaultNerThreshold);

/// Trains on labeled entity words (CoNLL-derived); the alphabet comes from `train_set` only and
/// the best-validation-accuracy parameters are returned. Throws EmptyDataset.
NerTrainingResult train_ner_from_conll(const std::vector<LabeledWord>& train_set,
                                       const std::vector<LabeledWord>& validation_set, MlpConfig config,
                                       double threshold = kDefaultNerThreshold);

WordClassification classify_word(const NerModel& model, std::string_view word);

/// preprocess_for_ner, classify each word, keep those at or above threshold.
std::vector<EntityPrediction> recognize(const NerModel& model, std::string_view text);

}  // namespace chatbot

#endif  // CHATBOT_ENTITY_RECOGNIZER_HPP_
