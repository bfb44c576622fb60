#include "chatbot/dialogue.hpp"

#include <iostream>

namespace chatbot {

void Session::record(std::string user_text, const BotReply& reply) {
  history_.push_back({std::move(user_text), reply});
  last_intent_ = reply.intent;
  last_entities_ = reply.entities;
}

std::string select_response(const std::vector<std::string>& templates, Rng& rng) {
  if (templates.empty()) throw NoTemplates("no response templates to choose from");
  return templates[static_cast<std::size_t>(rng.below(templates.size()))];
}

std::string render_lookup_reply(std::string_view /*intent*/, std::string_view location, std::string_view category,
                                const AttributeMap& attributes) {
  std::string out;
  out.append(category).append(" in ").append(location).append(" \xE2\x80\x94 ");
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (i > 0) out += ", ";
    out += attributes[i].first + ": " + attributes[i].second;
  }
  return out;
}

namespace {

BotReply build_reply(Session& session, const KnowledgeBase& kb, const IntentModel& intent_model,
                     const NerModel& ner_model, std::string_view text, const DialogueOptions& options) {
  BotReply reply;
  const IntentPrediction intent = classify(intent_model, text);
  reply.entities = recognize(ner_model, text);
  reply.intent_probability = intent.probability;
  if (intent.fallback) {
    reply.fallback = true;
    reply.text = options.fallback_text;
    return reply;
  }
  reply.intent = intent.intent;

  // LOC x MISC pairs in utterance order; the first pair present in NE_Values wins.
  // A 4-class recognizer labels every surviving word, so the first LOC may be a
  // common word such as "rate" while the real city comes later.
  for (const auto& location : reply.entities) {
    if (location.entity_type != "LOC") continue;
    for (const auto& category : reply.entities) {
      if (category.entity_type != "MISC") continue;
      if (auto attributes = ne_lookup(kb, location.word, category.word); attributes && !attributes->empty()) {
        reply.lookup_used = true;
        reply.text = render_lookup_reply(*reply.intent, location.word, category.word, *attributes);
        return reply;
      }
    }
  }

  const auto templates = responses_for(kb, *reply.intent);
  if (templates.empty()) {
    reply.intent.reset();
    reply.fallback = true;
    reply.text = options.fallback_text;
    return reply;
  }
  reply.text = select_response(templates, session.rng());
  return reply;
}

}  // namespace

BotReply respond(Session& session, const KnowledgeBase& kb, const IntentModel& intent_model, const NerModel& ner_model,
                 std::string_view text, const DialogueOptions& options) {
  BotReply reply;
  try {
    reply = build_reply(session, kb, intent_model, ner_model, text, options);
  } catch (const std::exception& e) {
    std::cerr << "respond: internal error, answering with fallback: " << e.what() << '\n';
    reply = BotReply{};
    reply.fallback = true;
    reply.text = options.fallback_text;
  }
  session.record(std::string(text), reply);
  return reply;
}

}  // namespace chatbot
