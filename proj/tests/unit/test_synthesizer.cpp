#include <gtest/gtest.h>

#include <atomic>
#include <functional>

#include "csdial/mock_backend.hpp"
#include "csdial/prompts.hpp"
#include "csdial/synthesizer.hpp"
#include "support.hpp"

namespace csdial {
namespace {

using testing::fixture;
using testing::TempDir;

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::function<std::string(const GenerationRequest&)> fn) : fn_(std::move(fn)) {}
  std::string id() const override { return "scripted"; }
  std::string generate(const GenerationRequest& r) override {
    ++calls;
    return fn_(r);
  }
  std::atomic<int> calls{0};

 private:
  std::function<std::string(const GenerationRequest&)> fn_;
};

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

DialogueTemplate refuses_template() {
  DialogueTemplate t;
  t.template_id = "tpl-refuses";
  t.head = "PersonX refuses PersonY";
  t.turn_count = 4;
  t.split = Split::kTrain;
  t.lines = {{"xAttr", "disagreeable"}, {"xReact", "annoyed and irritated"}, {"xNeed", "thinks about it"}};
  return t;
}

KnowledgeGraph fixture_graph() {
  auto r = RelationRegistry::defaults();
  r.load_file(fixture("relations_extra.tsv"));
  return load_triples(fixture("graph.tsv"), r).graph;
}

TEST(ParseDialogue, AcceptsAlternatingTurns) {
  auto turns = parse_dialogue("A: Hi.\nB: Hello.\n\nA: Bye.\n", 3);
  ASSERT_TRUE(turns);
  EXPECT_EQ((*turns)[1], (Turn{'B', "Hello."}));
}

TEST(ParseDialogue, RejectsContractViolations) {
  EXPECT_FALSE(parse_dialogue("A: Hi.\nB: Hello.", 3));
  EXPECT_FALSE(parse_dialogue("B: Hi.\nA: Hello.\nB: Bye.", 3));
  EXPECT_FALSE(parse_dialogue("A: Hi.\nA: Hello.\nB: Bye.", 3));
  EXPECT_FALSE(parse_dialogue("A: Hi.\nsome prose\nB: Bye.", 3));
  EXPECT_FALSE(parse_dialogue("A: Hi.\nB: \nA: Bye.", 3));
}

TEST(Dialogue, ContextAndValidResponse) {
  auto d = testing::refuses_dialogue();
  EXPECT_EQ(d.context().size(), 3u);
  EXPECT_EQ(d.valid_response(), "You should think about it before you say no.");
  EXPECT_EQ(check_dialogue(d, 4), "");
  EXPECT_NE(check_dialogue(d, 5), "");
  EXPECT_EQ(render_context(d.context()),
            "A: I refuse to do what you ask.\nB: Why are you being so disagreeable?\nA: I'm just annoyed and irritated.");
}

TEST(Naturalize, PromptCarriesInstructionExemplarsAndTemplate) {
  auto capture = std::make_shared<PromptCapture>();
  Gateway gw(std::make_shared<MockBackend>());
  gw.set_capture(capture);
  auto reg = RelationRegistry::defaults();
  naturalize(refuses_template(), reg, gw);
  auto entries = capture->entries(Purpose::kNaturalize);
  ASSERT_EQ(entries.size(), 1u);
  const auto& p = entries[0].prompt;
  EXPECT_EQ(prompts::naturalize_exemplars().size(), 15u);
  EXPECT_TRUE(p.starts_with(prompts::naturalize_instruction()));
  EXPECT_EQ(count(p, prompts::kTemplateLabel), 16u);
  EXPECT_NE(p.find(render_template(refuses_template(), reg)), std::string::npos);
}

TEST(Naturalize, RefusesDialogueParses) {
  auto backend = std::make_shared<ScriptedBackend>([](const GenerationRequest&) {
    return "A: I refuse to do what you ask.\nB: Why are you being so disagreeable?\n"
           "A: I'm just annoyed and irritated.\nB: You should think about it before you say no.";
  });
  Gateway gw(backend);
  auto d = naturalize(refuses_template(), RelationRegistry::defaults(), gw);
  ASSERT_EQ(d.turns.size(), 4u);
  EXPECT_EQ(d.valid_response(), "You should think about it before you say no.");
  EXPECT_EQ(d.dialogue_id, "dlg-tpl-refuses");
  EXPECT_EQ(d.split, Split::kTrain);
}

TEST(Naturalize, MockThreeTurnTemplate) {
  DialogueTemplate t;
  t.template_id = "tpl-3";
  t.head = "PersonX waves";
  t.turn_count = 3;
  t.lines = {{"xAttr", "friendly"}, {"xWant", "to say hello"}};
  Gateway a(std::make_shared<MockBackend>(9)), b(std::make_shared<MockBackend>(9));
  auto d = naturalize(t, RelationRegistry::defaults(), a);
  ASSERT_EQ(d.turns.size(), 3u);
  EXPECT_EQ(d.turns[0].speaker, 'A');
  EXPECT_EQ(d.turns[1].speaker, 'B');
  EXPECT_EQ(d.turns[2].speaker, 'A');
  EXPECT_EQ(d.turns[0].text, "I wave.");
  EXPECT_EQ(d, naturalize(t, RelationRegistry::defaults(), b));
}

TEST(Naturalize, RetriesWrongTurnCountThenSucceeds) {
  auto backend = std::make_shared<ScriptedBackend>([](const GenerationRequest& r) -> std::string {
    if (r.variant == 0) return "A: One.\nB: Two.";
    return "A: One.\nB: Two.\nA: Three.\nB: Four.";
  });
  Gateway gw(backend);
  auto d = naturalize(refuses_template(), RelationRegistry::defaults(), gw);
  EXPECT_EQ(d.turns.size(), 4u);
  EXPECT_EQ(backend->calls, 2);
}

TEST(Naturalize, RejectsAfterRetryCap) {
  auto backend = std::make_shared<ScriptedBackend>([](const GenerationRequest&) { return "A: One.\nB: Two."; });
  Gateway gw(backend);
  EXPECT_ERROR_KIND(naturalize(refuses_template(), RelationRegistry::defaults(), gw), ErrorKind::kSynthesisReject);
  EXPECT_EQ(backend->calls, kDefaultSynthesisRetries + 1);
}

TEST(InjectError, SharingExampleOpposite) {
  const std::string opposite = "That's awful. I don't want to share my creativity.";
  auto backend = std::make_shared<ScriptedBackend>([&](const GenerationRequest&) { return opposite; });
  Gateway gw(backend);
  auto d = testing::make_dialogue("row2", Split::kTrain,
                                  {"I paint every day.", "That's great. I'm glad you want to share your creativity."});
  auto pair = inject_error(d, gw);
  EXPECT_EQ(pair.invalid_response, opposite);
  EXPECT_EQ(pair.valid_response, d.valid_response());
  EXPECT_FALSE(pair.rephrased_invalid);
}

TEST(InjectError, MockFlipsPolarity) {
  Gateway gw(std::make_shared<MockBackend>());
  auto d = testing::make_dialogue("x", Split::kTrain, {"Should I go?", "Maybe.", "You should say no."});
  auto pair = inject_error(d, gw);
  EXPECT_FALSE(same_tokens(pair.invalid_response, pair.valid_response));
  EXPECT_EQ(pair.invalid_response, "You should say yes.");
}

TEST(InjectError, EmptyResponseIsPrecondition) {
  Gateway gw(std::make_shared<MockBackend>());
  auto d = testing::make_dialogue("x", Split::kTrain, {"Hi.", "Hello.", "  "});
  EXPECT_ERROR_KIND(inject_error(d, gw), ErrorKind::kPrecondition);
}

TEST(InjectError, EchoingBackendIsInjectionFailure) {
  auto backend = std::make_shared<ScriptedBackend>([](const GenerationRequest&) { return "you should SAY no"; });
  Gateway gw(backend);
  auto d = testing::make_dialogue("x", Split::kTrain, {"Should I go?", "Maybe.", "You should say no."});
  EXPECT_ERROR_KIND(inject_error(d, gw), ErrorKind::kInjectionFailure);
  EXPECT_EQ(backend->calls, kDefaultSynthesisRetries + 1);
}

TEST(Rephrase, MockPrefix) {
  Gateway gw(std::make_shared<MockBackend>());
  auto r = rephrase("You should say yes.", gw);
  EXPECT_EQ(r.text, "Well, you should say yes.");
  EXPECT_FALSE(r.fell_back);
}

TEST(Rephrase, FallsBackWithFlag) {
  auto backend = std::make_shared<ScriptedBackend>([](const GenerationRequest&) { return "You should say yes"; });
  Gateway gw(backend);
  auto r = rephrase("You should say yes.", gw);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.text, "You should say yes.");
  EXPECT_ERROR_KIND(rephrase(" ", gw), ErrorKind::kPrecondition);
}

TEST(SameTokens, CaseAndPunctuationInsensitive) {
  EXPECT_TRUE(same_tokens("You should say NO!", "you should say no"));
  EXPECT_FALSE(same_tokens("You should say yes.", "You should say no."));
}

TEST(Synthesis, PureFunctionOfTemplatesAndSeed) {
  auto g = fixture_graph();
  auto corpus = build_corpus(g, Split::kVal, 20, 31);
  auto run = [&] {
    Gateway gw(std::make_shared<MockBackend>(31));
    std::vector<CorruptedPair> out;
    for (const auto& t : corpus) out.push_back(inject_error(naturalize(t, g.registry(), gw), gw));
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Synthesis, EveryMockDialogueSatisfiesInvariants) {
  auto g = fixture_graph();
  Gateway gw(std::make_shared<MockBackend>(5));
  for (auto split : kAllSplits) {
    for (const auto& t : build_corpus(g, split, 30, 5)) {
      auto d = naturalize(t, g.registry(), gw);
      EXPECT_EQ(check_dialogue(d, t.turn_count), "") << t.template_id;
      EXPECT_EQ(d.split, t.split);
      auto pair = inject_error(d, gw);
      EXPECT_FALSE(same_tokens(pair.invalid_response, pair.valid_response)) << t.template_id;
    }
  }
}

TEST(Dialogues, FileRoundTrip) {
  TempDir dir;
  std::vector<Dialogue> ds = {testing::refuses_dialogue(), testing::make_dialogue("q", Split::kVal, {"a\tb", "\"c\"", "d"})};
  write_dialogues(dir / "d.jsonl", ds);
  EXPECT_EQ(read_dialogues(dir / "d.jsonl"), ds);
}

}  // namespace
}  // namespace csdial
