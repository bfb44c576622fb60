#ifndef CHATBOT_ERRORS_HPP_
#define CHATBOT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace chatbot {

/// Broad error families. The CLI maps `data` to exit code 2 and `runtime` to 3.
enum class ErrorFamily { data, runtime };

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, ErrorFamily family = ErrorFamily::data)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), family_(family) {}

  /// Stable machine-readable name such as "ValidationFailure".
  const std::string& kind() const noexcept { return kind_; }
  ErrorFamily family() const noexcept { return family_; }

 private:
  std::string kind_;
  ErrorFamily family_;
};

#define CHATBOT_DEFINE_ERROR(Name, Family)                                       \
  class Name : public Error {                                                    \
   public:                                                                       \
    explicit Name(const std::string& what) : Error(#Name, what, Family) {}      \
  }

// knowledge_base
CHATBOT_DEFINE_ERROR(MalformedJson, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(SchemaViolation, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(ValidationFailure, ErrorFamily::data);
// vectorizers
CHATBOT_DEFINE_ERROR(EmptyCorpus, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(UnknownLabel, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(CodeOutOfRange, ErrorFamily::data);
// neural_net
CHATBOT_DEFINE_ERROR(InvalidConfig, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(DimensionMismatch, ErrorFamily::runtime);
CHATBOT_DEFINE_ERROR(EmptyDataset, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(DivergenceDetected, ErrorFamily::runtime);
CHATBOT_DEFINE_ERROR(CorruptModel, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(VersionMismatch, ErrorFamily::data);
// intent_classifier / entity_recognizer
CHATBOT_DEFINE_ERROR(InsufficientExamples, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(EmptyEntityInventory, ErrorFamily::data);
// dialogue
CHATBOT_DEFINE_ERROR(NoTemplates, ErrorFamily::data);
// conll_eval
CHATBOT_DEFINE_ERROR(MalformedLine, ErrorFamily::data);
CHATBOT_DEFINE_ERROR(UnknownTag, ErrorFamily::data);

#undef CHATBOT_DEFINE_ERROR

}  // namespace chatbot

#endif  // CHATBOT_ERRORS_HPP_
