#include <gtest/gtest.h>
#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "json.hpp"
#include "model_fixtures.hpp"
// After Eigen: <resolv.h> defines a _res macro that collides with Eigen internals.
#include "httplib.h"

namespace chatbot {
namespace {

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run_cli(const std::vector<std::string>& args, const std::string& stdin_text = {}) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing::scratch_dir("cli"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  const auto sub_help = run_cli({"train-intent", "--help"});
  EXPECT_EQ(sub_help.code, cli::kExitOk);
  EXPECT_NE(sub_help.out.find("--learning-rate"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"validate-kb", "--kb", testing::sample_kb_path(), "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"train-ner", "--out", path("x.model")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"train-ner", "--kb", testing::sample_kb_path(), "--train",
                     testing::source_path("tests/data/conll_train.txt"), "--out", path("x.model")})
                .code,
            cli::kExitUsage);
  // A missing input file is rejected by the option validator.
  EXPECT_NE(run_cli({"train-intent", "--kb", path("missing.json"), "--out", path("m")}).code, cli::kExitOk);
}

TEST_F(CliTest, ValidateKb) {
  const auto ok = run_cli({"validate-kb", "--kb", testing::sample_kb_path()});
  EXPECT_EQ(ok.code, cli::kExitOk) << ok.err;
  EXPECT_EQ(ok.out.rfind("ok: 183 examples, 12 intents", 0), 0u) << ok.out;

  auto j = nlohmann::json::parse(testing::kTableOneKb);
  j["response"].erase(3);  // request_docs loses its response set
  testing::write_file(path("no_response.json"), j.dump());
  const auto missing = run_cli({"validate-kb", "--kb", path("no_response.json")});
  EXPECT_EQ(missing.code, cli::kExitData);
  EXPECT_NE(missing.err.find("request_docs"), std::string::npos) << missing.err;

  testing::write_file(path("broken.json"), "{\"input\": [");
  const auto broken = run_cli({"validate-kb", "--kb", path("broken.json")});
  EXPECT_EQ(broken.code, cli::kExitData);
  EXPECT_NE(broken.err.find("MalformedJson"), std::string::npos);

  EXPECT_EQ(run_cli({"validate-kb", "--kb", path("nothing.json")}).code, cli::kExitData);
}

TEST_F(CliTest, TrainIntentReportsAccuracyAndIsSeeded) {
  const auto a = run_cli({"train-intent", "--kb", testing::sample_kb_path(), "--out", path("a.model"), "--seed", "0"});
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_NE(a.out.find("test accuracy: "), std::string::npos);
  EXPECT_TRUE(a.err.empty());
  const auto b = run_cli({"train-intent", "--kb", testing::sample_kb_path(), "--out", path("b.model"), "--seed", "0"});
  EXPECT_EQ(testing::read_file(path("a.model")), testing::read_file(path("b.model")));

  const auto unseeded = run_cli({"train-intent", "--kb", testing::sample_kb_path(), "--out", path("c.model"),
                                 "--max-epochs", "3"});
  EXPECT_EQ(unseeded.code, cli::kExitOk);
  EXPECT_NE(unseeded.err.find("seed: "), std::string::npos);
  EXPECT_NE(unseeded.err.find("--seed"), std::string::npos);

  const auto bad = run_cli({"train-intent", "--kb", testing::sample_kb_path(), "--out", path("d.model"),
                            "--learning-rate", "-1"});
  EXPECT_EQ(bad.code, cli::kExitData) << bad.err;
}

TEST_F(CliTest, TrainNerFromConllAndKb) {
  const auto conll = run_cli({"train-ner", "--train", testing::source_path("tests/data/conll_train.txt"), "--valid",
                              testing::source_path("tests/data/conll_valid.txt"), "--out", path("c.model"), "--seed",
                              "1"});
  ASSERT_EQ(conll.code, cli::kExitOk) << conll.err;
  EXPECT_NE(conll.out.find("train words: 105, validation words: 38"), std::string::npos) << conll.out;
  EXPECT_NE(conll.out.find("best epoch"), std::string::npos);

  const auto eval = run_cli({"eval-ner", "--model", path("c.model"), "--test",
                             testing::source_path("tests/data/conll_test.txt"), "--format", "json"});
  ASSERT_EQ(eval.code, cli::kExitOk) << eval.err;
  EXPECT_EQ(nlohmann::json::parse(eval.out).at("weighted_avg").at("support").get<int>(), 36);

  const auto kb = run_cli({"train-ner", "--kb", testing::sample_kb_path(), "--out", path("k.model"), "--seed", "0",
                           "--max-epochs", "20"});
  ASSERT_EQ(kb.code, cli::kExitOk) << kb.err;
  EXPECT_NE(kb.out.find("train words: "), std::string::npos) << kb.out;

  // An intent model is not an entity model.
  ASSERT_EQ(run_cli({"train-intent", "--kb", testing::sample_kb_path(), "--out", path("i.model"), "--seed", "0",
                     "--max-epochs", "2"})
                .code,
            cli::kExitOk);
  EXPECT_EQ(run_cli({"eval-ner", "--model", path("i.model"), "--test",
                     testing::source_path("tests/data/conll_test.txt")})
                .code,
            cli::kExitData);
}

TEST_F(CliTest, EvalNerThreeSampleExample) {
  save_model_file(testing::vowel_ner_model().mlp(), path("vowel.model"));
  testing::write_file(path("gold.txt"), "aaa NN O B-LOC\nooo NN O B-LOC\n\noo NN O B-ORG\n");
  const auto text = run_cli({"eval-ner", "--model", path("vowel.model"), "--test", path("gold.txt")});
  ASSERT_EQ(text.code, cli::kExitOk) << text.err;
  EXPECT_NE(text.out.find("weighted avg  0.8333  0.6667  0.6667"), std::string::npos) << text.out;

  const auto js = run_cli({"eval-ner", "--model", path("vowel.model"), "--test", path("gold.txt"), "--format", "json"});
  ASSERT_EQ(js.code, cli::kExitOk);
  const auto j = nlohmann::json::parse(js.out);
  EXPECT_NEAR(j.at("weighted_avg").at("precision").get<double>(), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(j.at("weighted_avg").at("recall").get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(j.at("weighted_avg").at("f1").get<double>(), 2.0 / 3.0, 1e-12);

  testing::write_file(path("bad.txt"), "aaa NN O B-DATE\n");
  EXPECT_EQ(run_cli({"eval-ner", "--model", path("vowel.model"), "--test", path("bad.txt")}).code, cli::kExitData);
  EXPECT_EQ(run_cli({"eval-ner", "--model", path("vowel.model"), "--test", path("gold.txt"), "--format", "xml"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, ChatIsScriptableAndDeterministic) {
  testing::sample_intent().model.save(path("intent.model"));
  testing::sample_ner().model.save(path("ner.model"));
  const std::vector<std::string> args = {"chat",        "--kb",          testing::sample_kb_path(),
                                         "--intent-model", path("intent.model"), "--ner-model",
                                         path("ner.model"), "--seed",     "7"};
  const std::string script = "How are you?\nWhat is the taxi rate in Islamabad?\r\n\n";
  const auto a = run_cli(args, script);
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_EQ(run_cli(args, script).out, a.out);
  EXPECT_NE(a.out.find("you: What is the taxi rate in Islamabad?\nbot: taxi in islamabad"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("Starting: 20 Rs./km"), std::string::npos);
  EXPECT_NE(a.out.find("taxi/MISC"), std::string::npos);
  EXPECT_NE(a.out.find("islamabad/LOC"), std::string::npos);
  EXPECT_NE(a.out.find("intent: none ("), std::string::npos);  // the empty line falls back

  const auto eof = run_cli(args, "");
  EXPECT_EQ(eof.code, cli::kExitOk);
  EXPECT_TRUE(eof.out.empty());
}

// --- serve, as a real process -------------------------------------------------

// A listening socket on an ephemeral loopback port; closed on destruction.
class PortHolder {
 public:
  PortHolder() : fd_(::socket(AF_INET, SOCK_STREAM, 0)) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof addr;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), len) == 0 && ::listen(fd_, 1) == 0 &&
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
      port_ = ntohs(addr.sin_port);
    }
  }
  ~PortHolder() { ::close(fd_); }
  PortHolder(const PortHolder&) = delete;
  PortHolder& operator=(const PortHolder&) = delete;
  int port() const { return port_; }

 private:
  int fd_;
  int port_ = 0;
};

int free_port() { return PortHolder().port(); }

pid_t spawn_serve(const std::string& config_path) {
  const pid_t pid = fork();
  if (pid == 0) {
    const int devnull = ::open("/dev/null", O_WRONLY);
    dup2(devnull, STDOUT_FILENO);
    execl(CHATBOT_EXE, CHATBOT_EXE, "serve", "--config", config_path.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  return pid;
}

std::optional<int> wait_exit(pid_t pid, std::chrono::seconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    int status = 0;
    if (waitpid(pid, &status, WNOHANG) == pid) return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  kill(pid, SIGKILL);
  waitpid(pid, nullptr, 0);
  return std::nullopt;
}

class ServeTest : public CliTest {
 protected:
  std::string write_config(int port) {
    testing::sample_intent().model.save(path("intent.model"));
    testing::sample_ner().model.save(path("ner.model"));
    const nlohmann::json config = {{"kb", testing::sample_kb_path()}, {"intent_model", "intent.model"},
                                   {"ner_model", "ner.model"},       {"port", port}};
    testing::write_file(path("service.json"), config.dump());
    return path("service.json");
  }
};

TEST_F(ServeTest, StartsServesAndStopsOnSigint) {
  const int port = free_port();
  const pid_t pid = spawn_serve(write_config(port));
  ASSERT_GT(pid, 0);

  httplib::Client client("127.0.0.1", port);
  bool healthy = false;
  for (int i = 0; i < 250 && !healthy; ++i) {
    const auto r = client.Get("/api/health");
    healthy = r && r->status == 200;
    if (!healthy) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  EXPECT_TRUE(healthy);
  const auto created = client.Post("/api/sessions", "{}", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);

  kill(pid, SIGINT);
  EXPECT_EQ(wait_exit(pid, std::chrono::seconds(10)), 0);
}

TEST_F(ServeTest, OccupiedPortFailsWithRuntimeError) {
  PortHolder holder;
  const int port = holder.port();
  ASSERT_GT(port, 0);
  const pid_t pid = spawn_serve(write_config(port));
  EXPECT_EQ(wait_exit(pid, std::chrono::seconds(10)), cli::kExitRuntime);
}

TEST_F(ServeTest, MissingModelIsADataError) {
  const auto config = write_config(free_port());
  std::filesystem::remove(path("ner.model"));
  const pid_t pid = spawn_serve(config);
  EXPECT_EQ(wait_exit(pid, std::chrono::seconds(10)), cli::kExitData);
}

}  // namespace
}  // namespace chatbot
