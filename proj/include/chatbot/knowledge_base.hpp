#ifndef CHATBOT_KNOWLEDGE_BASE_HPP_
#define CHATBOT_KNOWLEDGE_BASE_HPP_

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chatbot {

/// The closed set of entity types, in codec order.
inline constexpr std::array<std::string_view, 4> kEntityTypes{"LOC", "MISC", "ORG", "PER"};

bool is_entity_type(std::string_view type) noexcept;

struct EntityBinding {
  std::string entity_type;
  std::string value;

  friend bool operator==(const EntityBinding&, const EntityBinding&) = default;
};

struct InputExample {
  std::string message;
  std::string intent;
  std::vector<EntityBinding> entities;

  friend bool operator==(const InputExample&, const InputExample&) = default;
};

struct ResponseSet {
  std::string intent;
  std::vector<std::string> templates;

  friend bool operator==(const ResponseSet&, const ResponseSet&) = default;
};

/// attribute name -> value, in authored order.
using AttributeMap = std::vector<std::pair<std::string, std::string>>;

/// location -> category -> attributes. Location and category keys are stored
/// lowercased; attribute names keep their authored spelling.
class NeValuesTree {
 public:
  struct Category {
    std::string name;
    AttributeMap attributes;
    friend bool operator==(const Category&, const Category&) = default;
  };
  struct Location {
    std::string name;
    std::vector<Category> categories;
    friend bool operator==(const Location&, const Location&) = default;
  };

  NeValuesTree() = default;
  explicit NeValuesTree(std::vector<Location> locations) : locations_(std::move(locations)) {}

  /// Case-insensitive lookup; std::nullopt when either key is absent.
  std::optional<AttributeMap> lookup(std::string_view location, std::string_view category) const;

  const std::vector<Location>& locations() const noexcept { return locations_; }
  bool empty() const noexcept { return locations_.empty(); }

  friend bool operator==(const NeValuesTree&, const NeValuesTree&) = default;

 private:
  std::vector<Location> locations_;
};

/// Parsed and validated knowledge base. Immutable after load_kb.
struct KnowledgeBase {
  std::vector<InputExample> inputs;
  std::vector<ResponseSet> responses;
  NeValuesTree ne_values;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

/// Parses and validates a knowledge base in the normalized JSON schema
/// (docs/kb-schema.json).
///
/// Throws MalformedJson on syntax errors, SchemaViolation when a field is
/// missing or has the wrong shape, and ValidationFailure when an invariant is
/// broken. Messages carry a JSON-pointer style path to the offending node.
KnowledgeBase load_kb(std::istream& source);
KnowledgeBase load_kb(std::string_view json_text);
KnowledgeBase load_kb_file(const std::string& path);

/// Serializes back to the normalized schema; load_kb(serialize_kb(kb)) == kb.
std::string serialize_kb(const KnowledgeBase& kb, int indent = 2);

/// Every entity binding across all inputs, in input order, duplicates kept.
std::vector<EntityBinding> entity_inventory(const KnowledgeBase& kb);

/// Templates for `intent`, or an empty list when the intent is unknown.
std::vector<std::string> responses_for(const KnowledgeBase& kb, std::string_view intent);

std::optional<AttributeMap> ne_lookup(const KnowledgeBase& kb, std::string_view location, std::string_view category);

/// Checks the trainability invariant: at least two distinct intents, each
/// with at least two examples. Throws ValidationFailure naming the offender.
void validate_trainable(const KnowledgeBase& kb);

/// Distinct intents in first-appearance order over the inputs.
std::vector<std::string> intent_inventory(const KnowledgeBase& kb);

}  // namespace chatbot

#endif  // CHATBOT_KNOWLEDGE_BASE_HPP_
