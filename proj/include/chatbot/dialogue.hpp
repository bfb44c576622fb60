#ifndef CHATBOT_DIALOGUE_HPP_
#define CHATBOT_DIALOGUE_HPP_

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chatbot/entity_recognizer.hpp"
#include "chatbot/intent_classifier.hpp"
#include "chatbot/knowledge_base.hpp"
#include "chatbot/random.hpp"

namespace chatbot {

inline constexpr std::string_view kDefaultFallbackText = "Sorry, I didn't understand that.";

struct BotReply {
  std::string text;
  std::optional<std::string> intent;
  double intent_probability = 0.0;
  std::vector<EntityPrediction> entities;
  bool fallback = false;
  bool lookup_used = false;

  friend bool operator==(const BotReply&, const BotReply&) = default;
};

struct Turn {
  std::string user_text;
  BotReply reply;
};

/// One conversation. Only the latest intent and entities are remembered, and
/// they never influence the next reply.
class Session {
 public:
  explicit Session(std::string id = {}, std::uint64_t rng_seed = 0)
      : id_(std::move(id)), rng_seed_(rng_seed), rng_(rng_seed) {}

  const std::string& id() const noexcept { return id_; }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }
  const std::vector<Turn>& history() const noexcept { return history_; }
  const std::optional<std::string>& last_intent() const noexcept { return last_intent_; }
  const std::vector<EntityPrediction>& last_entities() const noexcept { return last_entities_; }

  Rng& rng() noexcept { return rng_; }
  void record(std::string user_text, const BotReply& reply);

  /// Guards concurrent use of one session; callers hold it across respond().
  std::mutex& mutex() noexcept { return mutex_; }

 private:
  std::string id_;
  std::uint64_t rng_seed_;
  Rng rng_;
  std::vector<Turn> history_;
  std::optional<std::string> last_intent_;
  std::vector<EntityPrediction> last_entities_;
  std::mutex mutex_;
};

struct DialogueOptions {
  std::string fallback_text{kDefaultFallbackText};
};

/// Uniform choice driven by the session generator. Throws NoTemplates.
std::string select_response(const std::vector<std::string>& templates, Rng& rng);

/// "<category> in <location> <U+2014> A: x, B: y" with attributes in stored order.
std::string render_lookup_reply(std::string_view intent, std::string_view location, std::string_view category,
                                const AttributeMap& attributes);

/// Classifies, recognizes, and answers. Below the intent threshold the reply is
/// the fallback text. Otherwise every (LOC, MISC) pair of recognized words is
/// tried in utterance order and the first pair found in NE_Values is rendered
/// with render_lookup_reply; with no hit a template for the intent is chosen.
/// Never throws: internal errors become a fallback reply and a diagnostic on stderr.
BotReply respond(Session& session, const KnowledgeBase& kb, const IntentModel& intent_model, const NerModel& ner_model,
                 std::string_view text, const DialogueOptions& options = {});

}  // namespace chatbot

#endif  // CHATBOT_DIALOGUE_HPP_
