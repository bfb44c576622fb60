#include "chatbot/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "chatbot/errors.hpp"
#include "json.hpp"

namespace chatbot {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c); });
  return out;
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\v\f") == std::string_view::npos; }

const char* type_name(const ordered_json& j) { return j.type_name(); }

void require_keys(const ordered_json& obj, const std::string& path, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) throw SchemaViolation(path + ": expected object, found " + type_name(obj));
  for (const char* key : required) {
    if (!obj.contains(key)) throw SchemaViolation(path + ": missing field \"" + key + "\"");
  }
  for (const auto& [key, _] : obj.items()) {
    const auto known = [&](std::initializer_list<const char*> keys) {
      return std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
    };
    if (!known(required) && !known(optional)) throw SchemaViolation(path + ": unknown field \"" + key + "\"");
  }
}

const std::string& as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaViolation(path + ": expected string, found " + type_name(j));
  return j.get_ref<const std::string&>();
}

const ordered_json& as_array(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaViolation(path + ": expected array, found " + type_name(j));
  return j;
}

EntityBinding parse_entity(const ordered_json& j, const std::string& path) {
  require_keys(j, path, {"type", "value"});
  EntityBinding binding{as_string(j["type"], path + "/type"), as_string(j["value"], path + "/value")};
  if (!is_entity_type(binding.entity_type)) {
    throw ValidationFailure(path + "/type: entity type \"" + binding.entity_type +
                            "\" is not one of LOC, MISC, ORG, PER");
  }
  if (binding.value.empty() || binding.value.find_first_of(" \t\r\n\v\f") != std::string::npos) {
    throw ValidationFailure(path + "/value: entity value must be a single non-empty token, got \"" +
                            binding.value + "\"");
  }
  return binding;
}

InputExample parse_input(const ordered_json& j, const std::string& path) {
  require_keys(j, path, {"message", "intent"}, {"entities"});
  InputExample ex;
  ex.message = as_string(j["message"], path + "/message");
  ex.intent = as_string(j["intent"], path + "/intent");
  if (is_blank(ex.message)) throw ValidationFailure(path + "/message: message is empty");
  if (is_blank(ex.intent)) throw ValidationFailure(path + "/intent: intent label is empty");
  if (j.contains("entities")) {
    const auto& entities = as_array(j["entities"], path + "/entities");
    for (std::size_t k = 0; k < entities.size(); ++k) {
      ex.entities.push_back(parse_entity(entities[k], path + "/entities/" + std::to_string(k)));
    }
  }
  return ex;
}

ResponseSet parse_response(const ordered_json& j, const std::string& path) {
  require_keys(j, path, {"intent", "templates"});
  ResponseSet rs;
  rs.intent = as_string(j["intent"], path + "/intent");
  if (is_blank(rs.intent)) throw ValidationFailure(path + "/intent: intent label is empty");
  const auto& templates = as_array(j["templates"], path + "/templates");
  for (std::size_t k = 0; k < templates.size(); ++k) {
    rs.templates.push_back(as_string(templates[k], path + "/templates/" + std::to_string(k)));
  }
  if (rs.templates.empty()) throw ValidationFailure(path + "/templates: intent \"" + rs.intent + "\" has no templates");
  return rs;
}

NeValuesTree parse_ne_values(const ordered_json& j) {
  const std::string root = "/ne_values";
  if (!j.is_object()) throw SchemaViolation(root + ": expected object, found " + type_name(j));
  std::vector<NeValuesTree::Location> locations;
  std::set<std::string> seen_locations;
  for (const auto& [loc_key, loc_value] : j.items()) {
    const std::string loc_path = root + "/" + loc_key;
    if (!loc_value.is_object()) {
      throw ValidationFailure(loc_path + ": expected category object (depth must be exactly 3)");
    }
    NeValuesTree::Location location{lowercase(loc_key), {}};
    if (!seen_locations.insert(location.name).second) {
      throw ValidationFailure(loc_path + ": duplicate location key after lowercasing");
    }
    std::set<std::string> seen_categories;
    for (const auto& [cat_key, cat_value] : loc_value.items()) {
      const std::string cat_path = loc_path + "/" + cat_key;
      if (!cat_value.is_object()) {
        throw ValidationFailure(cat_path + ": expected attribute object (depth must be exactly 3)");
      }
      NeValuesTree::Category category{lowercase(cat_key), {}};
      if (!seen_categories.insert(category.name).second) {
        throw ValidationFailure(cat_path + ": duplicate category key after lowercasing");
      }
      std::set<std::string> seen_attributes;
      for (const auto& [attr_key, attr_value] : cat_value.items()) {
        const std::string attr_path = cat_path + "/" + attr_key;
        if (attr_value.is_object() || attr_value.is_array()) {
          throw ValidationFailure(attr_path + ": nesting deeper than location/category/attribute is not allowed");
        }
        if (!seen_attributes.insert(lowercase(attr_key)).second) {
          throw ValidationFailure(attr_path + ": duplicate attribute key after lowercasing");
        }
        category.attributes.emplace_back(attr_key, as_string(attr_value, attr_path));
      }
      location.categories.push_back(std::move(category));
    }
    locations.push_back(std::move(location));
  }
  return NeValuesTree(std::move(locations));
}

KnowledgeBase from_json(const ordered_json& root) {
  require_keys(root, "", {"input", "response", "ne_values"});
  KnowledgeBase kb;
  const auto& inputs = as_array(root["input"], "/input");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    kb.inputs.push_back(parse_input(inputs[i], "/input/" + std::to_string(i)));
  }
  const auto& responses = as_array(root["response"], "/response");
  std::set<std::string> response_intents;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    auto rs = parse_response(responses[i], "/response/" + std::to_string(i));
    if (!response_intents.insert(rs.intent).second) {
      throw ValidationFailure("/response/" + std::to_string(i) + ": duplicate response set for intent \"" +
                              rs.intent + "\"");
    }
    kb.responses.push_back(std::move(rs));
  }
  kb.ne_values = parse_ne_values(root["ne_values"]);

  if (kb.inputs.empty()) {
    throw ValidationFailure("/input: no input examples; fewer than 2 intents available for training");
  }
  for (std::size_t i = 0; i < kb.inputs.size(); ++i) {
    const auto& intent = kb.inputs[i].intent;
    if (!response_intents.count(intent)) {
      throw ValidationFailure("/input/" + std::to_string(i) + "/intent: intent \"" + intent +
                              "\" has no response set");
    }
  }
  return kb;
}

}  // namespace

bool is_entity_type(std::string_view type) noexcept {
  return std::find(kEntityTypes.begin(), kEntityTypes.end(), type) != kEntityTypes.end();
}

std::optional<AttributeMap> NeValuesTree::lookup(std::string_view location, std::string_view category) const {
  const std::string loc = lowercase(location);
  const std::string cat = lowercase(category);
  for (const auto& l : locations_) {
    if (l.name != loc) continue;
    for (const auto& c : l.categories) {
      if (c.name == cat) return c.attributes;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

KnowledgeBase load_kb(std::istream& source) {
  std::stringstream buffer;
  buffer << source.rdbuf();
  return load_kb(buffer.str());
}

KnowledgeBase load_kb(std::string_view json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson("byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return from_json(root);
}

KnowledgeBase load_kb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open knowledge base file '" + path + "'");
  return load_kb(in);
}

std::string serialize_kb(const KnowledgeBase& kb, int indent) {
  ordered_json root;
  root["input"] = ordered_json::array();
  for (const auto& ex : kb.inputs) {
    ordered_json entities = ordered_json::array();
    for (const auto& e : ex.entities) entities.push_back({{"type", e.entity_type}, {"value", e.value}});
    root["input"].push_back({{"message", ex.message}, {"intent", ex.intent}, {"entities", entities}});
  }
  root["response"] = ordered_json::array();
  for (const auto& rs : kb.responses) root["response"].push_back({{"intent", rs.intent}, {"templates", rs.templates}});
  root["ne_values"] = ordered_json::object();
  for (const auto& loc : kb.ne_values.locations()) {
    ordered_json categories = ordered_json::object();
    for (const auto& cat : loc.categories) {
      ordered_json attributes = ordered_json::object();
      for (const auto& [name, value] : cat.attributes) attributes[name] = value;
      categories[cat.name] = attributes;
    }
    root["ne_values"][loc.name] = categories;
  }
  return root.dump(indent);
}

std::vector<EntityBinding> entity_inventory(const KnowledgeBase& kb) {
  std::vector<EntityBinding> all;
  for (const auto& ex : kb.inputs) all.insert(all.end(), ex.entities.begin(), ex.entities.end());
  return all;
}

std::vector<std::string> responses_for(const KnowledgeBase& kb, std::string_view intent) {
  for (const auto& rs : kb.responses) {
    if (rs.intent == intent) return rs.templates;
  }
  return {};
}

std::optional<AttributeMap> ne_lookup(const KnowledgeBase& kb, std::string_view location, std::string_view category) {
  return kb.ne_values.lookup(location, category);
}

std::vector<std::string> intent_inventory(const KnowledgeBase& kb) {
  std::vector<std::string> intents;
  for (const auto& ex : kb.inputs) {
    if (std::find(intents.begin(), intents.end(), ex.intent) == intents.end()) intents.push_back(ex.intent);
  }
  return intents;
}

void validate_trainable(const KnowledgeBase& kb) {
  const auto intents = intent_inventory(kb);
  if (intents.size() < 2) {
    throw ValidationFailure("/input: fewer than 2 intents (found " + std::to_string(intents.size()) + ")");
  }
  for (const auto& intent : intents) {
    const auto n = std::count_if(kb.inputs.begin(), kb.inputs.end(), [&](const auto& ex) { return ex.intent == intent; });
    if (n < 2) {
      throw ValidationFailure("/input: intent \"" + intent + "\" has " + std::to_string(n) +
                              " example(s); at least 2 are needed for a stratified split");
    }
  }
}

}  // namespace chatbot
