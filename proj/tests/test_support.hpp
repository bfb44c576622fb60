#ifndef CHATBOT_TESTS_TEST_SUPPORT_HPP_
#define CHATBOT_TESTS_TEST_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace chatbot::testing {

inline std::string source_path(const std::string& rel) { return std::string(CHATBOT_SOURCE_DIR) + "/" + rel; }

inline std::string sample_kb_path() { return source_path("data/sample_kb.json"); }

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("chatbot-test-" + name + "-" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// The four messages behind Table 1 plus one hidden row that introduces the
// "need" column (displayed as all zeros in the visible rows).
inline const char* kTableOneKb = R"({
  "input": [
    {"message": "How are you?", "intent": "utter_greetings"},
    {"message": "What is your name?", "intent": "request_name"},
    {"message": "What is taxi rate in Islamabad?", "intent": "request_rate",
     "entities": [{"type": "MISC", "value": "taxi"}, {"type": "LOC", "value": "Islamabad"}]},
    {"message": "Which documents are required please?", "intent": "request_docs"},
    {"message": "I need a taxi", "intent": "request_rate"}
  ],
  "response": [
    {"intent": "utter_greetings", "templates": ["I am fine! What about you?", "I am fine. Thanks."]},
    {"intent": "request_name", "templates": ["I am Bot. What can I help you?"]},
    {"intent": "request_rate", "templates": ["Which city?"]},
    {"intent": "request_docs", "templates": ["CNIC and license."]}
  ],
  "ne_values": {
    "Islamabad": {
      "taxi": {"Starting": "20 Rs./km", "Minimum": "15 Rs./km"},
      "bike": {"Starting": "5 Rs./km", "Minimum": "4 Rs./km"},
      "business": {"Starting": "50Rs./km", "Minimum": "40Rs./km"}
    }
  }
})";

}  // namespace chatbot::testing

#endif  // CHATBOT_TESTS_TEST_SUPPORT_HPP_
