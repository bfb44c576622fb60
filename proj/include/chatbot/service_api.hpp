#ifndef CHATBOT_SERVICE_API_HPP_
#define CHATBOT_SERVICE_API_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "chatbot/dialogue.hpp"
#include "chatbot/entity_recognizer.hpp"
#include "chatbot/intent_classifier.hpp"
#include "chatbot/knowledge_base.hpp"

namespace httplib {
class Server;
}

namespace chatbot {

/// Service settings. Precedence, lowest first: built-in defaults, the JSON
/// config file, CHATBOT_* environment variables (docs/service.md).
struct ServiceConfig {
  std::string kb_path;
  std::string intent_model_path;
  std::string ner_model_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<double> intent_threshold;  ///< overrides the value stored in the model
  std::optional<double> ner_threshold;
  std::string fallback_text{kDefaultFallbackText};
  std::chrono::seconds session_timeout{30 * 60};
  std::string cors_origin = "*";
  std::uint64_t seed = 0;  ///< base for per-session reply seeds

  /// Reads a JSON config; relative paths resolve against the file's directory.
  static ServiceConfig from_file(const std::string& path);
  static ServiceConfig from_json(std::string_view json_text, const std::string& base_dir = {});
  /// Applies CHATBOT_* overrides through `getenv` (injectable for tests).
  void apply_env(const std::function<const char*(const char*)>& getenv);
};

/// Status code plus JSON body.
struct HttpResult {
  int status = 200;
  std::string body;
};

/// Hosts the knowledge base, both models and the session table. Handlers are
/// plain methods so they can be exercised without a socket.
class ChatService {
 public:
  explicit ChatService(ServiceConfig config = {});

  /// Installs ready models; before this every model endpoint answers 503.
  void install(KnowledgeBase kb, IntentModel intent_model, NerModel ner_model);
  /// Loads the three files named in the config, then install().
  void load_from_config();
  bool ready() const noexcept { return ready_.load(); }

  HttpResult create_session();
  HttpResult chat(std::string_view request_body);
  HttpResult model_info() const;
  HttpResult health() const;

  /// Drops sessions idle for longer than the configured timeout.
  std::size_t expire_sessions(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());
  std::size_t session_count() const;

  /// Registers the /api routes and CORS handling on `server`.
  void mount(httplib::Server& server);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Models {
    KnowledgeBase kb;
    IntentModel intent;
    NerModel ner;
  };
  struct SessionEntry {
    std::shared_ptr<Session> session;
    std::chrono::steady_clock::time_point last_used;
  };

  std::shared_ptr<const Models> models() const;

  ServiceConfig config_;
  std::atomic<bool> ready_{false};
  mutable std::mutex models_mutex_;
  std::shared_ptr<const Models> models_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, SessionEntry> sessions_;
  std::uint64_t session_counter_ = 0;
};

}  // namespace chatbot

#endif  // CHATBOT_SERVICE_API_HPP_
