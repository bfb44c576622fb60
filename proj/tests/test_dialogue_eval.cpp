// Dialogue policy, CoNLL parsing and classification metrics.
#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "chatbot/conll_eval.hpp"
#include "chatbot/dialogue.hpp"
#include "json.hpp"
#include "model_fixtures.hpp"

namespace chatbot {
namespace {

using testing::sample_intent;
using testing::sample_kb;
using testing::sample_ner;

TEST(Dialogue, LookupReplyTemplate) {
  EXPECT_EQ(render_lookup_reply("request_rate", "islamabad", "taxi", {{"Starting", "20 Rs./km"}, {"Minimum", "15 Rs./km"}}),
            "taxi in islamabad \xE2\x80\x94 Starting: 20 Rs./km, Minimum: 15 Rs./km");
}

TEST(Dialogue, SelectResponseIsSeededAndCoversTemplates) {
  const std::vector<std::string> templates = {"a", "b", "c"};
  Rng r1(4), r2(4);
  std::set<std::string> seen;
  for (int i = 0; i < 60; ++i) {
    const auto x = select_response(templates, r1);
    EXPECT_EQ(x, select_response(templates, r2));
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 3u);
  Rng r(0);
  EXPECT_THROW(select_response({}, r), NoTemplates);
}

TEST(Dialogue, IslamabadTaxiRateUsesNeValues) {
  Session s("t", 0);
  const auto reply = respond(s, sample_kb(), sample_intent().model, sample_ner().model,
                             "What is the taxi rate in Islamabad?");
  EXPECT_FALSE(reply.fallback);
  EXPECT_TRUE(reply.lookup_used);
  EXPECT_EQ(reply.intent.value_or(""), "request_rate");
  EXPECT_NE(reply.text.find("20 Rs./km"), std::string::npos) << reply.text;
  EXPECT_EQ(reply.text, "taxi in islamabad \xE2\x80\x94 Starting: 20 Rs./km, Minimum: 15 Rs./km");
  ASSERT_EQ(s.history().size(), 1u);
  EXPECT_EQ(s.last_intent(), reply.intent);
  EXPECT_EQ(s.last_entities(), reply.entities);
}

TEST(Dialogue, FallbackOnEmptyAndGibberish) {
  Session s("t", 0);
  DialogueOptions options{"custom fallback"};
  IntentModel strict = sample_intent().model;
  strict.set_threshold(0.99);
  for (const char* text : {"", "qqq zzz xxyyzz"}) {
    const auto reply = respond(s, sample_kb(), strict, sample_ner().model, text, options);
    EXPECT_TRUE(reply.fallback) << text;
    EXPECT_EQ(reply.text, "custom fallback");
    EXPECT_FALSE(reply.intent.has_value());
    EXPECT_FALSE(reply.lookup_used);
  }
  EXPECT_EQ(s.history().size(), 2u);
}

TEST(Dialogue, TemplatesWhenNoLookupHit) {
  Session s("t", 3);
  const auto reply = respond(s, sample_kb(), sample_intent().model, sample_ner().model, "What is your name?");
  ASSERT_FALSE(reply.fallback);
  EXPECT_FALSE(reply.lookup_used);
  const auto templates = responses_for(sample_kb(), *reply.intent);
  EXPECT_NE(std::find(templates.begin(), templates.end(), reply.text), templates.end());
}

TEST(Dialogue, SameSeedSameTranscript) {
  const std::vector<std::string> script = {"How are you?", "What is your name?", "What is the taxi rate in Islamabad?",
                                           "thanks a lot", "bye", "How are you?", "How are you?"};
  const auto run = [&](std::uint64_t seed) {
    Session s("x", seed);
    std::vector<BotReply> out;
    for (const auto& line : script) out.push_back(respond(s, sample_kb(), sample_intent().model, sample_ner().model, line));
    return out;
  };
  EXPECT_EQ(run(42), run(42));
}

TEST(Dialogue, StateDoesNotInfluenceReplies) {
  Session a("a", 9), b("b", 9);
  // Different first turns, each consuming one template draw.
  const auto first_a = respond(a, sample_kb(), sample_intent().model, sample_ner().model, "bye");
  const auto first_b = respond(b, sample_kb(), sample_intent().model, sample_ner().model, "How are you?");
  ASSERT_FALSE(first_a.lookup_used || first_a.fallback);
  ASSERT_FALSE(first_b.lookup_used || first_b.fallback);
  EXPECT_NE(a.last_intent(), b.last_intent());
  const auto ra = respond(a, sample_kb(), sample_intent().model, sample_ner().model, "What is your name?");
  const auto rb = respond(b, sample_kb(), sample_intent().model, sample_ner().model, "What is your name?");
  EXPECT_EQ(ra, rb);
}

// ---------------------------------------------------------------------------
// CoNLL parsing

TEST(Conll, ParsesSharedTaskColumns) {
  std::istringstream in("-DOCSTART- -X- -X- O\n\nU.N. NNP I-NP I-ORG\nofficial NN I-NP O\r\n\nEkeus NNP B-NP B-PER\n");
  const auto tokens = parse_conll(in);
  EXPECT_EQ(tokens, (std::vector<ConllToken>{{"U.N.", "I-ORG"}, {"official", "O"}, {"Ekeus", "B-PER"}}));
  EXPECT_EQ(extract_entity_words(tokens), (std::vector<LabeledWord>{{"u.n.", "ORG"}, {"ekeus", "PER"}}));
}

TEST(Conll, MultiTokenEntitiesFlattenPerWord) {
  std::istringstream in("New NNP B-LOC\nYork NNP I-LOC\nthe DT O\n");
  EXPECT_EQ(extract_entity_words(parse_conll(in)), (std::vector<LabeledWord>{{"new", "LOC"}, {"york", "LOC"}}));
  std::istringstream all_o("a DT O\nb DT O\n");
  EXPECT_TRUE(extract_entity_words(parse_conll(all_o)).empty());
}

TEST(Conll, ErrorsCarryLineNumbers) {
  std::istringstream bad_tag("ok NN O\nfoo bar I-BANANA\n");
  try {
    parse_conll(bad_tag);
    FAIL();
  } catch (const UnknownTag& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream one_column("\n\nlonely\n");
  try {
    parse_conll(one_column);
    FAIL();
  } catch (const MalformedLine& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  for (const char* tag : {"B-DATE", "X-LOC", "I-", "LOC", "o"}) {
    std::istringstream in(std::string("w NN ") + tag + "\n");
    EXPECT_THROW(parse_conll(in), UnknownTag) << tag;
  }
}

TEST(Conll, FixtureFilesParse) {
  for (const char* name : {"conll_train.txt", "conll_valid.txt", "conll_test.txt"}) {
    const auto words = extract_entity_words(parse_conll_file(testing::source_path(std::string("tests/data/") + name)));
    EXPECT_FALSE(words.empty()) << name;
  }
}

// ---------------------------------------------------------------------------
// Metrics

const std::vector<std::string> kTypes = {"LOC", "MISC", "ORG", "PER"};

TEST(Metrics, HandEnumeratedThreeSampleExample) {
  // gold [LOC, LOC, ORG], predicted [LOC, ORG, ORG]
  const std::vector<int> gold{0, 0, 2}, pred{0, 2, 2};
  const auto r = compute_report(gold, pred, kTypes);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[2].precision, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[2].recall, 1.0);
  EXPECT_NEAR(r.weighted.precision, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(r.weighted.recall, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.weighted.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.per_class[1].support, 0);
  EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.0);  // 0/0 -> 0

  const auto text = render_report(r, ReportFormat::text);
  EXPECT_NE(text.find("LOC  1.0000  0.5000"), std::string::npos) << text;
  EXPECT_NE(text.find("weighted avg  0.8333  0.6667  0.6667"), std::string::npos) << text;
  EXPECT_NE(text.find("confusion matrix"), std::string::npos);
}

TEST(Metrics, PerfectPredictions) {
  const std::vector<int> y{0, 1, 2, 3, 3, 1};
  const auto r = compute_report(y, y, kTypes);
  EXPECT_TRUE(r.confusion.isDiagonal());
  EXPECT_DOUBLE_EQ(r.weighted.f1, 1.0);
  EXPECT_DOUBLE_EQ(r.macro.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_NE(render_report(r, ReportFormat::text).find("weighted avg  1.0000  1.0000  1.0000"), std::string::npos);
}

TEST(Metrics, JsonRoundTrip) {
  const std::vector<int> gold{0, 0, 2, 3, 1, 1}, pred{0, 2, 2, 3, 3, 1};
  const auto r = compute_report(gold, pred, kTypes);
  const auto json_text = render_report(r, ReportFormat::json);
  EXPECT_TRUE(nlohmann::json::parse(json_text).is_object());
  EXPECT_EQ(report_from_json(json_text), r);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(compute_report(std::vector<int>{}, std::vector<int>{}, kTypes), EmptyDataset);
  EXPECT_THROW(compute_report(std::vector<int>{0}, std::vector<int>{0, 1}, kTypes), DimensionMismatch);
  EXPECT_THROW(compute_report(std::vector<int>{4}, std::vector<int>{0}, kTypes), CodeOutOfRange);
}

TEST(Metrics, InvariantsOnRandomInstances) {
  std::mt19937 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 50)(gen);
    std::vector<int> gold(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      gold[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, 3)(gen);
      pred[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, 3)(gen);
    }
    const auto r = compute_report(gold, pred, kTypes);
    EXPECT_EQ(r.confusion.sum(), n);
    double wp = 0;
    long micro_tp = 0;
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(r.confusion.row(c).sum(), r.per_class[static_cast<std::size_t>(c)].support);
      wp += static_cast<double>(r.per_class[static_cast<std::size_t>(c)].support) * r.per_class[static_cast<std::size_t>(c)].precision;
      micro_tp += r.confusion(c, c);
    }
    EXPECT_NEAR(r.weighted.precision, wp / n, 1e-12);
    // Single-label: micro precision == micro recall == accuracy.
    EXPECT_NEAR(static_cast<double>(micro_tp) / n, r.accuracy, 1e-12);
    for (const auto& m : r.per_class) {
      for (double v : {m.precision, m.recall, m.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(Evaluate, UsesArgmaxWithoutThreshold) {
  NerModel m = testing::vowel_ner_model();
  m.set_threshold(0.999999);
  // gold LOC, LOC, ORG -> predicted LOC, ORG, ORG
  const auto r = evaluate(m, {{"aaa", "LOC"}, {"ooo", "LOC"}, {"oo", "ORG"}});
  EXPECT_EQ(r.confusion.sum(), 3);
  EXPECT_NEAR(r.weighted.precision, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(r.weighted.recall, 2.0 / 3.0, 1e-12);
  EXPECT_THROW(evaluate(m, {}), EmptyDataset);
}

}  // namespace
}  // namespace chatbot
