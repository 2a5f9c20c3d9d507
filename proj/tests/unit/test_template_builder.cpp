#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

#include "csdial/template_builder.hpp"
#include "support.hpp"

namespace csdial {
namespace {

using testing::fixture;
using testing::TempDir;

KnowledgeGraph fixture_graph() {
  auto r = RelationRegistry::defaults();
  r.load_file(fixture("relations_extra.tsv"));
  return load_triples(fixture("graph.tsv"), r).graph;
}

TEST(TurnCount, StaysInRange) {
  Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    int n = sample_turn_count(rng);
    EXPECT_GE(n, kMinTurns);
    EXPECT_LE(n, kMaxTurns);
  }
}

// Frozen from tests/oracles/rng_oracle.py.
TEST(TurnCount, SeededDrawsAreFrozen) {
  Rng rng(20231015);
  std::vector<int> draws;
  for (int i = 0; i < 8; ++i) draws.push_back(sample_turn_count(rng));
  EXPECT_EQ(draws, (std::vector<int>{7, 7, 8, 4, 8, 3, 7, 4}));
}

TEST(TurnCount, FrequenciesAreUniform) {
  Rng rng(42);
  std::array<int, kMaxTurns + 1> counts{};
  constexpr int kDraws = 60000;
  for (int i = 0; i < kDraws; ++i) ++counts[sample_turn_count(rng)];
  for (int t = kMinTurns; t <= kMaxTurns; ++t)
    EXPECT_NEAR(static_cast<double>(counts[t]) / kDraws, 1.0 / 6.0, 0.01) << "turn count " << t;
}

TEST(BuildTemplate, RefusesHeadUsesAllThreeRelations) {
  auto g = load_triples(fixture("refuses.tsv")).graph;
  Rng rng(1);
  auto t = build_template(g, "PersonX refuses PersonY", 4, rng);
  EXPECT_EQ(t.turn_count, 4);
  ASSERT_EQ(t.lines.size(), 3u);
  std::set<std::string> rels;
  for (const auto& l : t.lines) rels.insert(l.relation);
  EXPECT_EQ(rels, (std::set<std::string>{"xAttr", "xReact", "xNeed"}));
  EXPECT_EQ(check_template(t, &g), "");
}

TEST(BuildTemplate, ForcedSelectionAndUnderfullHead) {
  auto g = parse_triples("h\txAttr\tkind\ttrain\nh\txWant\tto rest\ttrain\n").graph;
  Rng rng(3);
  auto t = build_template(g, "h", 3, rng);
  ASSERT_EQ(t.lines.size(), 2u);
  std::set<std::string> rels{t.lines[0].relation, t.lines[1].relation};
  EXPECT_EQ(rels, (std::set<std::string>{"xAttr", "xWant"}));
  EXPECT_ERROR_KIND(build_template(g, "h", 5, rng), ErrorKind::kUnderfullHead);
}

TEST(BuildTemplate, DeterministicGivenRngState) {
  auto g = fixture_graph();
  const auto head = g.heads(Split::kTrain).front();
  Rng a(99), b(99);
  EXPECT_EQ(build_template(g, head, 6, Split::kTrain, a), build_template(g, head, 6, Split::kTrain, b));
}

TEST(BuildTemplate, SameRelationTwiceIsOneChoice) {
  // Two tails under xReact still count as a single relation.
  auto g = parse_triples("h\txReact\tglad\ttrain\nh\txReact\tcalm\ttrain\nh\txAttr\tkind\ttrain\n").graph;
  Rng rng(5);
  EXPECT_NO_THROW(build_template(g, "h", 3, rng));
  EXPECT_ERROR_KIND(build_template(g, "h", 4, rng), ErrorKind::kUnderfullHead);
}

TEST(RenderTemplate, MatchesRefusesExample) {
  DialogueTemplate t;
  t.head = "PersonX refuses PersonY";
  t.turn_count = 4;
  t.lines = {{"xAttr", "disagreeable"}, {"xReact", "annoyed and irritated"}, {"xNeed", "thinks about it"}};
  const std::string expected =
      "PersonX refuses PersonY\n"
      "\xE2\x86\xAA PersonX is seen as: disagreeable\n"
      "\xE2\x86\xAA As a result, PersonX feels: annoyed and irritated\n"
      "\xE2\x86\xAA Before that, PersonX needed: thinks about it";
  auto reg = RelationRegistry::defaults();
  EXPECT_EQ(render_template(t, reg), expected);
  EXPECT_EQ(render_template(t, reg), render_template(t, reg));
}

TEST(RenderTemplate, SingleLineTemplateHasTwoLines) {
  DialogueTemplate t;
  t.head = "PersonX waves";
  t.turn_count = 2;
  t.lines = {{"xAttr", "friendly"}};
  auto text = render_template(t, RelationRegistry::defaults());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

TEST(CheckTemplate, FlagsViolations) {
  auto g = load_triples(fixture("refuses.tsv")).graph;
  DialogueTemplate t;
  t.head = "PersonX refuses PersonY";
  t.split = Split::kTrain;
  t.turn_count = 3;
  t.lines = {{"xAttr", "disagreeable"}, {"xAttr", "disagreeable"}};
  EXPECT_NE(check_template(t, &g), "");
  t.lines = {{"xAttr", "disagreeable"}, {"xReact", "delighted"}};
  EXPECT_NE(check_template(t, &g), "");
  t.lines = {{"xAttr", "disagreeable"}, {"xReact", "annoyed and irritated"}};
  EXPECT_EQ(check_template(t, &g), "");
  t.split = Split::kTest;
  EXPECT_NE(check_template(t, &g), "");
  t.split = Split::kTrain;
  t.turn_count = 9;
  EXPECT_NE(check_template(t), "");
}

TEST(BuildCorpus, FiftyTemplatesSatisfyInvariants) {
  auto g = fixture_graph();
  auto corpus = build_corpus(g, Split::kTrain, 50, 11);
  ASSERT_EQ(corpus.size(), 50u);
  std::set<std::string> ids;
  for (const auto& t : corpus) {
    EXPECT_EQ(check_template(t, &g), "") << t.template_id;
    EXPECT_EQ(t.split, Split::kTrain);
    EXPECT_EQ(t.lines.size(), static_cast<std::size_t>(t.turn_count - 1));
    for (const auto& l : t.lines) {
      bool found = false;
      for (auto i : g.triples_of(t.head)) {
        const auto& tr = g.triples()[i];
        found |= tr.relation == l.relation && tr.tail == l.tail && tr.split == t.split;
      }
      EXPECT_TRUE(found) << t.template_id << " " << l.relation;
    }
    ids.insert(t.template_id);
  }
  EXPECT_EQ(ids.size(), 50u);
}

TEST(BuildCorpus, ZeroTargetIsEmpty) { EXPECT_TRUE(build_corpus(fixture_graph(), Split::kVal, 0, 1).empty()); }

TEST(BuildCorpus, SameSeedSameCorpus) {
  auto g = fixture_graph();
  EXPECT_EQ(build_corpus(g, Split::kTrain, 40, 5), build_corpus(g, Split::kTrain, 40, 5));
  EXPECT_NE(build_corpus(g, Split::kTrain, 40, 5), build_corpus(g, Split::kTrain, 40, 6));
}

TEST(BuildCorpus, IndependentOfWorkerCount) {
  auto g = fixture_graph();
  EXPECT_EQ(build_corpus(g, Split::kTest, 120, 8, 1), build_corpus(g, Split::kTest, 120, 8, 4));
}

TEST(BuildCorpus, PrefixIsStableUnderLargerTargets) {
  auto g = fixture_graph();
  auto small = build_corpus(g, Split::kTrain, 10, 3);
  auto large = build_corpus(g, Split::kTrain, 30, 3);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
}

TEST(BuildCorpus, SeedTraceStartsWithTemplateSeed) {
  auto g = fixture_graph();
  auto corpus = build_corpus(g, Split::kTrain, 5, 77);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ASSERT_GE(corpus[i].seed_trace.size(), 3u);
    EXPECT_EQ(corpus[i].seed_trace[0], derive_seed(77, "templates/train", i));
  }
}

TEST(BuildCorpus, FallsBackToSmallerTurnCounts) {
  auto g = load_triples(fixture("refuses.tsv")).graph;
  CorpusStats stats;
  auto corpus = build_corpus(g, Split::kTrain, 60, 2, 1, &stats);
  ASSERT_EQ(corpus.size(), 60u);
  for (const auto& t : corpus) EXPECT_LE(t.turn_count, 4);
  EXPECT_GT(stats.reduced_turn_counts, 0u);
}

TEST(BuildCorpus, CapacityErrorReportsAchievedCount) {
  auto g = parse_triples("a\txAttr\tkind\ttrain\nb\txReact\tglad\ttrain\n").graph;
  try {
    build_corpus(g, Split::kTrain, 3, 1);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
    EXPECT_EQ(e.achieved(), 0u);
  }
}

TEST(BuildCorpus, TurnCountMomentsMatchUniform) {
  auto g = fixture_graph();
  CorpusStats stats;
  auto corpus = build_corpus(g, Split::kTrain, 10000, 2024, 2, &stats);
  EXPECT_EQ(stats.reduced_turn_counts, 0u);
  double sum = 0, sq = 0;
  for (const auto& t : corpus) sum += t.turn_count;
  const double mean = sum / corpus.size();
  for (const auto& t : corpus) sq += (t.turn_count - mean) * (t.turn_count - mean);
  const double sd = std::sqrt(sq / (corpus.size() - 1));
  EXPECT_NEAR(mean, 5.5, 0.1);
  EXPECT_NEAR(sd, std::sqrt(35.0 / 12.0), 0.05);
}

TEST(Templates, FileRoundTrip) {
  TempDir dir;
  auto corpus = build_corpus(fixture_graph(), Split::kVal, 12, 4);
  write_templates(dir / "t.jsonl", corpus);
  EXPECT_EQ(read_templates(dir / "t.jsonl"), corpus);
}

}  // namespace
}  // namespace csdial
