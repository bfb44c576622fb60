#ifndef CHATBOT_INTENT_CLASSIFIER_HPP_
#define CHATBOT_INTENT_CLASSIFIER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chatbot/knowledge_base.hpp"
#include "chatbot/neural_net.hpp"
#include "chatbot/vectorizers.hpp"

namespace chatbot {

inline constexpr double kDefaultIntentThreshold = 0.5;
inline constexpr double kDefaultTestFraction = 0.2;

/// Bag-of-words intent classifier. Input width equals the vocabulary size and
/// output width equals the number of intents.
class IntentModel {
 public:
  IntentModel() = default;
  /// Wraps a trained network; its `features` are the vocabulary terms.
  explicit IntentModel(Mlp mlp);

  const Mlp& mlp() const noexcept { return mlp_; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const LabelCodec& codec() const noexcept { return mlp_.labels; }
  double threshold() const noexcept { return mlp_.info.threshold; }
  void set_threshold(double threshold);

  void save(const std::string& path) const { save_model_file(mlp_, path); }
  static IntentModel load(const std::string& path);

 private:
  Mlp mlp_;
  Vocabulary vocabulary_;
};

struct IntentPrediction {
  std::optional<std::string> intent;  ///< empty when fallback
  double probability = 0.0;           ///< maximum class probability
  bool fallback = false;
  Eigen::RowVectorXd distribution;

  friend bool operator==(const IntentPrediction& a, const IntentPrediction& b) {
    return a.intent == b.intent && a.probability == b.probability && a.fallback == b.fallback &&
           a.distribution.size() == b.distribution.size() && a.distribution == b.distribution;
  }
};

/// Per-intent proportional split. Each intent with n examples sends
/// round(n * test_fraction), clamped to [1, n - 1], to the test side. Both
/// sides keep the original input order.
///
/// Throws InsufficientExamples when an intent has fewer than two examples.
std::pair<std::vector<InputExample>, std::vector<InputExample>> stratified_split(
    const std::vector<InputExample>& examples, double test_fraction, std::uint64_t seed);

struct IntentTrainingResult {
  IntentModel model;
  TrainReport report;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

/// Splits the KB inputs, builds vocabulary and codec from the training side
/// only, trains for config.max_epochs, and scores both sides.
/// Layer sizes 0 and 3 of `config` are overwritten to fit the data.
IntentTrainingResult train_intent_model(const KnowledgeBase& kb, MlpConfig config,
                                        double test_fraction = kDefaultTestFraction,
                                        std::uint64_t seed = 0, double threshold = kDefaultIntentThreshold);

/// Same pipeline as inference: preprocess_for_intent then vectorize_message.
Eigen::RowVectorXd intent_features(const IntentModel& model, std::string_view text);

IntentPrediction classify(const IntentModel& model, std::string_view text);

}  // namespace chatbot

#endif  // CHATBOT_INTENT_CLASSIFIER_HPP_
