#include "cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "chatbot/conll_eval.hpp"
#include "chatbot/dialogue.hpp"
#include "chatbot/entity_recognizer.hpp"
#include "chatbot/intent_classifier.hpp"
#include "chatbot/knowledge_base.hpp"
#include "chatbot/service_api.hpp"
#include "httplib.h"

namespace chatbot::cli {
namespace {

struct SeedOption {
  std::optional<std::uint64_t> value;

  std::uint64_t resolve(std::ostream& err) const {
    if (value) return *value;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << seed << " (random; pass --seed to reproduce)\n";
    return seed;
  }
};

// MlpConfig fields exposed one-to-one as flags.
void add_mlp_flags(CLI::App* cmd, MlpConfig& c) {
  cmd->add_option("--hidden1", c.layer_sizes[1], "Units in the first hidden layer")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--hidden2", c.layer_sizes[2], "Units in the second hidden layer")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--learning-rate", c.learning_rate, "SGD step size")->capture_default_str();
  cmd->add_option("--l2", c.l2_lambda, "L2 penalty on weights")->capture_default_str();
  cmd->add_option("--max-epochs", c.max_epochs, "Maximum training epochs")->capture_default_str();
  cmd->add_option("--patience", c.patience, "Epochs without validation improvement before stopping")
      ->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "Mini-batch size")->capture_default_str();
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_report(std::ostream& out, const TrainReport& r) {
  out << "epochs run: " << r.epochs_run << "\n";
  if (!r.train_loss.empty()) out << "final train loss: " << fmt4(r.train_loss.back()) << "\n";
  if (!r.validation_accuracy.empty()) {
    out << "best epoch: " << r.best_epoch << " (validation accuracy "
        << fmt4(r.validation_accuracy[static_cast<std::size_t>(r.best_epoch - 1)]) << ")\n";
  }
  if (r.stopped_early) out << "stopped early\n";
}

int train_intent(const std::string& kb_path, const std::string& out_path, MlpConfig config, double test_fraction,
                 double threshold, const SeedOption& seed_opt, std::ostream& out, std::ostream& err) {
  const KnowledgeBase kb = load_kb_file(kb_path);
  validate_trainable(kb);
  config.seed = seed_opt.resolve(err);
  const auto result = train_intent_model(kb, config, test_fraction, config.seed, threshold);
  result.model.save(out_path);
  out << "intents: " << result.model.codec().size() << "\n";
  out << "vocabulary: " << result.model.vocabulary().size() << " terms\n";
  out << "train examples: " << result.train_size << ", test examples: " << result.test_size << "\n";
  print_report(out, result.report);
  out << "train accuracy: " << fmt4(result.train_accuracy) << "\n";
  out << "test accuracy: " << fmt4(result.test_accuracy) << "\n";
  out << "model written to " << out_path << "\n";
  return kExitOk;
}

int train_ner(const std::string& train_path, const std::string& valid_path, const std::string& kb_path,
              const std::string& out_path, MlpConfig config, double threshold, const SeedOption& seed_opt,
              std::ostream& out, std::ostream& err) {
  config.seed = seed_opt.resolve(err);
  NerTrainingResult result;
  if (!kb_path.empty()) {
    result = train_ner_from_kb(load_kb_file(kb_path), config, threshold);
  } else {
    const auto train_words = extract_entity_words(parse_conll_file(train_path));
    std::vector<LabeledWord> valid_words;
    if (!valid_path.empty()) valid_words = extract_entity_words(parse_conll_file(valid_path));
    result = train_ner_from_conll(train_words, valid_words, config, threshold);
  }
  result.model.save(out_path);
  out << "alphabet: " << result.model.alphabet().size() << " characters\n";
  out << "train words: " << result.train_size << ", validation words: " << result.validation_size << "\n";
  print_report(out, result.report);
  out << "model written to " << out_path << "\n";
  return kExitOk;
}

int eval_ner(const std::string& model_path, const std::string& test_path, const std::string& format,
             std::ostream& out) {
  const NerModel model = NerModel::load(model_path);
  const auto gold = extract_entity_words(parse_conll_file(test_path));
  const EvalReport report = evaluate(model, gold);
  out << render_report(report, format == "json" ? ReportFormat::json : ReportFormat::text);
  return kExitOk;
}

void print_turn(std::ostream& out, const BotReply& reply) {
  out << "bot: " << reply.text << "\n";
  out << "  intent: ";
  if (reply.intent) {
    out << *reply.intent << " (" << fmt4(reply.intent_probability) << ")";
  } else {
    out << "none (" << fmt4(reply.intent_probability) << ", fallback)";
  }
  out << "\n  entities:";
  if (reply.entities.empty()) out << " none";
  for (std::size_t i = 0; i < reply.entities.size(); ++i) {
    const auto& e = reply.entities[i];
    out << (i == 0 ? " " : ", ") << e.word << "/" << e.entity_type << " (" << fmt4(e.probability) << ")";
  }
  out << "\n";
}

int chat(const std::string& kb_path, const std::string& intent_path, const std::string& ner_path,
         std::optional<double> intent_threshold, std::optional<double> ner_threshold, const SeedOption& seed_opt,
         std::istream& in, std::ostream& out, std::ostream& err) {
  const KnowledgeBase kb = load_kb_file(kb_path);
  IntentModel intent = IntentModel::load(intent_path);
  NerModel ner = NerModel::load(ner_path);
  if (intent_threshold) intent.set_threshold(*intent_threshold);
  if (ner_threshold) ner.set_threshold(*ner_threshold);
  Session session("cli", seed_opt.resolve(err));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << "you: " << line << "\n";
    print_turn(out, respond(session, kb, intent, ner, line));
    out.flush();
  }
  return kExitOk;
}

int serve(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ServiceConfig config = config_path.empty() ? ServiceConfig{} : ServiceConfig::from_file(config_path);
  config.apply_env([](const char* name) { return std::getenv(name); });

  // Block the shutdown signals before any thread starts so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ChatService service(config);
  service.load_from_config();

  httplib::Server server;
  // httplib's defaults add SO_REUSEPORT, which lets a second instance share the port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  service.mount(server);
  if (!server.bind_to_port(config.host, config.port)) {
    err << "error: cannot bind " << config.host << ":" << config.port << "\n";
    return kExitRuntime;
  }

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled.store(true);
    server.stop();
  });

  out << "serving on http://" << config.host << ":" << config.port << "\n";
  out.flush();
  const bool clean = server.listen_after_bind();
  const bool by_signal = signalled.load();
  if (!by_signal) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  out << "shut down\n";
  return clean || by_signal ? kExitOk : kExitRuntime;
}

int validate(const std::string& kb_path, std::ostream& out) {
  const KnowledgeBase kb = load_kb_file(kb_path);
  validate_trainable(kb);
  const auto inventory = entity_inventory(kb);
  std::size_t locations = kb.ne_values.locations().size();
  out << "ok: " << kb.inputs.size() << " examples, " << intent_inventory(kb).size() << " intents, "
      << kb.responses.size() << " response sets, " << inventory.size() << " entity bindings, " << locations
      << " locations\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intent and entity chatbot: training, evaluation, chat and HTTP service", "chatbot"};
  app.require_subcommand(1);

  std::string kb_path, out_path, train_path, valid_path, model_path, test_path, format = "text", config_path;
  std::string intent_path, ner_path;
  SeedOption seed;
  MlpConfig config;
  double test_fraction = kDefaultTestFraction;
  double intent_threshold = kDefaultIntentThreshold;
  double ner_threshold = kDefaultNerThreshold;
  std::optional<double> chat_intent_threshold, chat_ner_threshold;

  auto* ti = app.add_subcommand("train-intent", "Train the intent classifier on a knowledge base");
  ti->add_option("--kb", kb_path, "Knowledge base JSON")->required()->check(CLI::ExistingFile);
  ti->add_option("--out", out_path, "Output model file")->required();
  ti->add_option("--seed", seed.value, "Seed for split, initialization and shuffling (random if omitted)");
  ti->add_option("--test-fraction", test_fraction, "Fraction of each intent held out for testing")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  ti->add_option("--threshold", intent_threshold, "Confidence below which replies fall back")->capture_default_str();
  add_mlp_flags(ti, config);

  auto* tn = app.add_subcommand("train-ner", "Train the entity recognizer on CoNLL files or a knowledge base");
  auto* train_opt = tn->add_option("--train", train_path, "CoNLL training file")->check(CLI::ExistingFile);
  tn->add_option("--valid", valid_path, "CoNLL validation file used for early stopping")
      ->check(CLI::ExistingFile)->needs(train_opt);
  auto* kb_opt = tn->add_option("--kb", kb_path, "Train on knowledge base entities instead")->check(CLI::ExistingFile);
  train_opt->excludes(kb_opt);
  tn->add_option("--out", out_path, "Output model file")->required();
  tn->add_option("--seed", seed.value, "Seed for initialization and shuffling (random if omitted)");
  tn->add_option("--threshold", ner_threshold, "Minimum probability for a word to count as an entity")
      ->capture_default_str();
  add_mlp_flags(tn, config);

  auto* en = app.add_subcommand("eval-ner", "Evaluate an entity model on a CoNLL file");
  en->add_option("--model", model_path, "NER model file")->required()->check(CLI::ExistingFile);
  en->add_option("--test", test_path, "CoNLL test file")->required()->check(CLI::ExistingFile);
  en->add_option("--format", format, "Report format")->capture_default_str()->check(CLI::IsMember({"text", "json"}));

  auto* ch = app.add_subcommand("chat", "Interactive chat on stdin; one message per line");
  ch->add_option("--kb", kb_path, "Knowledge base JSON")->required()->check(CLI::ExistingFile);
  ch->add_option("--intent-model", intent_path, "Intent model file")->required()->check(CLI::ExistingFile);
  ch->add_option("--ner-model", ner_path, "NER model file")->required()->check(CLI::ExistingFile);
  ch->add_option("--seed", seed.value, "Seed for response selection (random if omitted)");
  ch->add_option("--intent-threshold", chat_intent_threshold, "Override the intent model threshold");
  ch->add_option("--ner-threshold", chat_ner_threshold, "Override the NER model threshold");

  auto* sv = app.add_subcommand("serve", "Run the HTTP chat service");
  sv->add_option("--config", config_path, "Service config JSON; CHATBOT_* variables override it")
      ->check(CLI::ExistingFile);

  auto* vk = app.add_subcommand("validate-kb", "Check a knowledge base for schema and training problems");
  vk->add_option("--kb", kb_path, "Knowledge base JSON")->required();

  std::vector<std::string> argv_storage{"chatbot"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'chatbot --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*ti) return train_intent(kb_path, out_path, config, test_fraction, intent_threshold, seed, out, err);
    if (*tn) {
      if (train_path.empty() && kb_path.empty()) {
        err << "error: train-ner needs --train or --kb\n";
        return kExitUsage;
      }
      return train_ner(train_path, valid_path, kb_path, out_path, config, ner_threshold, seed, out, err);
    }
    if (*en) return eval_ner(model_path, test_path, format, out);
    if (*ch) return chat(kb_path, intent_path, ner_path, chat_intent_threshold, chat_ner_threshold, seed, in, out, err);
    if (*sv) return serve(config_path, out, err);
    if (*vk) return validate(kb_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.family() == ErrorFamily::data ? kExitData : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace chatbot::cli
