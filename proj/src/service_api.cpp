#include "chatbot/service_api.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace chatbot {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

HttpResult json_result(int status, const json& body) { return {status, body.dump()}; }

HttpResult error_result(int status, const std::string& message) { return json_result(status, {{"error", message}}); }

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

double parse_probability(const std::string& text, const char* name) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0 && v < 1.0)) {
    throw InvalidConfig(std::string(name) + " must be a number in (0, 1), got \"" + text + "\"");
  }
  return v;
}

}  // namespace

ServiceConfig ServiceConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str(), std::filesystem::path(path).parent_path().string());
}

ServiceConfig ServiceConfig::from_json(std::string_view json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw MalformedJson(std::string("service config: ") + e.what());
  }
  if (!j.is_object()) throw SchemaViolation("service config must be a JSON object");
  ServiceConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "kb") {
        c.kb_path = resolve(value.get<std::string>(), base_dir);
      } else if (key == "intent_model") {
        c.intent_model_path = resolve(value.get<std::string>(), base_dir);
      } else if (key == "ner_model") {
        c.ner_model_path = resolve(value.get<std::string>(), base_dir);
      } else if (key == "host") {
        c.host = value.get<std::string>();
      } else if (key == "port") {
        c.port = value.get<int>();
      } else if (key == "intent_threshold") {
        c.intent_threshold = value.get<double>();
      } else if (key == "ner_threshold") {
        c.ner_threshold = value.get<double>();
      } else if (key == "fallback_text") {
        c.fallback_text = value.get<std::string>();
      } else if (key == "session_timeout_minutes") {
        c.session_timeout = std::chrono::seconds(static_cast<long>(value.get<double>() * 60.0));
      } else if (key == "cors_origin") {
        c.cors_origin = value.get<std::string>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw SchemaViolation("service config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("service config: ") + e.what());
  }
  return c;
}

void ServiceConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  const auto get = [&](const char* name) -> std::optional<std::string> {
    const char* v = getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("CHATBOT_KB")) kb_path = *v;
  if (auto v = get("CHATBOT_INTENT_MODEL")) intent_model_path = *v;
  if (auto v = get("CHATBOT_NER_MODEL")) ner_model_path = *v;
  if (auto v = get("CHATBOT_HOST")) host = *v;
  if (auto v = get("CHATBOT_PORT")) {
    try {
      port = std::stoi(*v);
    } catch (const std::exception&) {
      throw InvalidConfig("CHATBOT_PORT must be an integer, got \"" + *v + "\"");
    }
  }
  if (auto v = get("CHATBOT_INTENT_THRESHOLD")) intent_threshold = parse_probability(*v, "CHATBOT_INTENT_THRESHOLD");
  if (auto v = get("CHATBOT_NER_THRESHOLD")) ner_threshold = parse_probability(*v, "CHATBOT_NER_THRESHOLD");
  if (auto v = get("CHATBOT_FALLBACK_TEXT")) fallback_text = *v;
  if (auto v = get("CHATBOT_SESSION_TIMEOUT_MINUTES")) {
    try {
      session_timeout = std::chrono::seconds(static_cast<long>(std::stod(*v) * 60.0));
    } catch (const std::exception&) {
      throw InvalidConfig("CHATBOT_SESSION_TIMEOUT_MINUTES must be a number");
    }
  }
  if (auto v = get("CHATBOT_CORS_ORIGIN")) cors_origin = *v;
}

ChatService::ChatService(ServiceConfig config) : config_(std::move(config)) {}

void ChatService::install(KnowledgeBase kb, IntentModel intent_model, NerModel ner_model) {
  if (config_.intent_threshold) intent_model.set_threshold(*config_.intent_threshold);
  if (config_.ner_threshold) ner_model.set_threshold(*config_.ner_threshold);
  auto models = std::make_shared<const Models>(Models{std::move(kb), std::move(intent_model), std::move(ner_model)});
  {
    std::lock_guard lock(models_mutex_);
    models_ = std::move(models);
  }
  ready_.store(true);
}

void ChatService::load_from_config() {
  KnowledgeBase kb = load_kb_file(config_.kb_path);
  IntentModel intent = IntentModel::load(config_.intent_model_path);
  NerModel ner = NerModel::load(config_.ner_model_path);
  install(std::move(kb), std::move(intent), std::move(ner));
}

std::shared_ptr<const ChatService::Models> ChatService::models() const {
  std::lock_guard lock(models_mutex_);
  return models_;
}

HttpResult ChatService::create_session() {
  if (!ready()) return error_result(503, "models not loaded");
  expire_sessions();
  std::lock_guard lock(sessions_mutex_);
  const std::uint64_t n = ++session_counter_;
  const std::uint64_t seed = splitmix64(config_.seed ^ splitmix64(n));
  char id[40];
  std::snprintf(id, sizeof id, "s%llu-%016llx", static_cast<unsigned long long>(n),
                static_cast<unsigned long long>(splitmix64(seed)));
  auto session = std::make_shared<Session>(id, seed);
  sessions_[id] = {session, std::chrono::steady_clock::now()};
  return json_result(201, {{"session_id", std::string(id)}});
}

HttpResult ChatService::chat(std::string_view request_body) {
  const auto models = this->models();
  if (!ready() || !models) return error_result(503, "models not loaded");

  json request;
  try {
    request = json::parse(request_body);
  } catch (const json::parse_error&) {
    return error_result(400, "request body is not valid JSON");
  }
  if (!request.is_object() || !request.contains("session_id") || !request["session_id"].is_string()) {
    return error_result(400, "missing string field \"session_id\"");
  }
  if (!request.contains("message") || !request["message"].is_string()) {
    return error_result(400, "missing string field \"message\"");
  }
  const auto session_id = request["session_id"].get<std::string>();
  const auto message = request["message"].get<std::string>();

  expire_sessions();
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return error_result(404, "unknown session \"" + session_id + "\"");
    it->second.last_used = std::chrono::steady_clock::now();
    session = it->second.session;
  }

  BotReply reply;
  {
    std::lock_guard session_lock(session->mutex());
    reply = respond(*session, models->kb, models->intent, models->ner, message, {config_.fallback_text});
  }

  json entities = json::array();
  for (const auto& e : reply.entities) {
    entities.push_back({{"word", e.word}, {"type", e.entity_type}, {"probability", e.probability}});
  }
  return json_result(200, {{"session_id", session_id},
                           {"reply", reply.text},
                           {"intent", reply.intent ? json(*reply.intent) : json(nullptr)},
                           {"intent_probability", reply.intent_probability},
                           {"entities", entities},
                           {"fallback", reply.fallback},
                           {"lookup_used", reply.lookup_used}});
}

HttpResult ChatService::model_info() const {
  const auto models = this->models();
  if (!ready() || !models) return error_result(503, "models not loaded");
  return json_result(200, {{"intent_labels", models->intent.codec().labels()},
                           {"entity_labels", models->ner.codec().labels()},
                           {"vocab_size", models->intent.vocabulary().size()},
                           {"alphabet_size", models->ner.alphabet().size()},
                           {"thresholds", {{"intent", models->intent.threshold()}, {"ner", models->ner.threshold()}}}});
}

HttpResult ChatService::health() const {
  if (!ready()) return json_result(503, {{"status", "starting"}, {"models_loaded", false}});
  return json_result(200, {{"status", "ok"}, {"models_loaded", true}});
}

std::size_t ChatService::expire_sessions(std::chrono::steady_clock::time_point now) {
  std::lock_guard lock(sessions_mutex_);
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_used > config_.session_timeout) {
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::size_t ChatService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

void ChatService::mount(httplib::Server& server) {
  const auto send = [](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/api/sessions", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, create_session());
  });
  server.Post("/api/chat", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, chat(req.body));
  });
  server.Get("/api/model", [this, send](const httplib::Request&, httplib::Response& res) { send(res, model_info()); });
  server.Get("/api/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
}

}  // namespace chatbot
