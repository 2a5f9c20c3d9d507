#include <gtest/gtest.h>

#include "csdial/error.hpp"
#include "csdial/kg_store.hpp"
#include "support.hpp"

namespace csdial {
namespace {

using testing::fixture;

TEST(KgStore, RefusesFixtureHasOneHeadAndThreeTriples) {
  auto loaded = load_triples(fixture("refuses.tsv"));
  EXPECT_EQ(loaded.graph.head_count(), 1u);
  EXPECT_EQ(loaded.graph.triples().size(), 3u);
  EXPECT_EQ(loaded.graph.triples_of("PersonX refuses PersonY").size(), 3u);
}

TEST(KgStore, EmptyInputIsEmptyGraphError) {
  EXPECT_ERROR_KIND(parse_triples(""), ErrorKind::kEmptyGraph);
  EXPECT_ERROR_KIND(parse_triples("PersonX waves\tzzz\tnothing\ttrain\n"), ErrorKind::kEmptyGraph);
}

TEST(KgStore, UnreadableFileIsIngestionError) {
  EXPECT_ERROR_KIND(load_triples("/nonexistent/graph.tsv"), ErrorKind::kIngestion);
}

TEST(KgStore, MalformedRecordsAreIngestionErrors) {
  EXPECT_ERROR_KIND(parse_triples("a\txAttr\tb\n"), ErrorKind::kIngestion);
  EXPECT_ERROR_KIND(parse_triples("a\txAttr\tb\tholdout\n"), ErrorKind::kIngestion);
}

TEST(KgStore, UnknownRelationIsCountedAndSkipped) {
  auto loaded = load_triples(fixture("unknown_relation.tsv"));
  EXPECT_EQ(loaded.report.records, 5u);
  EXPECT_EQ(loaded.graph.triples().size(), 4u);
  EXPECT_EQ(loaded.report.skipped_unknown_relation, 1u);
  EXPECT_EQ(loaded.report.unknown_relations.at("zzz"), 1u);
}

TEST(KgStore, DuplicateTriplesAreDropped) {
  auto loaded = parse_triples(
      "PersonX waves\txAttr\tfriendly\ttrain\n"
      "PersonX waves\txAttr\tfriendly\ttrain\n"
      "PersonX waves\txReact\tcheerful\ttrain\n");
  EXPECT_EQ(loaded.graph.triples().size(), 2u);
  EXPECT_EQ(loaded.report.duplicates, 1u);
}

TEST(KgStore, HeadsFiltersByDegreeAndSplit) {
  auto loaded = parse_triples(
      "A\txAttr\tx\ttrain\nA\txReact\ty\ttrain\nA\txNeed\tz\ttrain\n"
      "B\txAttr\tw\ttrain\n");
  const auto& g = loaded.graph;
  EXPECT_EQ(g.heads(Split::kTrain, 2), std::vector<std::string>{"A"});
  EXPECT_EQ(g.heads(Split::kTrain, 0), (std::vector<std::string>{"A", "B"}));
  EXPECT_TRUE(g.heads(Split::kTest, 0).empty());
}

TEST(KgStore, HeadsAreLexicographic) {
  auto g = load_triples(fixture("graph.tsv"), [] {
             auto r = RelationRegistry::defaults();
             r.load_file(fixture("relations_extra.tsv"));
             return r;
           }()).graph;
  for (auto split : kAllSplits) {
    auto hs = g.heads(split);
    EXPECT_TRUE(std::is_sorted(hs.begin(), hs.end()));
  }
}

TEST(KgStore, StockSurfaceForms) {
  auto r = RelationRegistry::defaults();
  EXPECT_EQ(r.size(), 6u);
  EXPECT_EQ(r.surface_form("xAttr"), "PersonX is seen as:");
  EXPECT_EQ(r.surface_form("xNeed"), "Before that, PersonX needed:");
  EXPECT_EQ(r.surface_form("xIntent"), "PersonX wanted:");
  EXPECT_EQ(r.surface_form("xReact"), "As a result, PersonX feels:");
  EXPECT_ERROR_KIND(r.surface_form("oReact"), ErrorKind::kRegistryMiss);
}

TEST(KgStore, RegistryFileExtendsDefaults) {
  auto r = RelationRegistry::defaults();
  r.load_file(fixture("relations_extra.tsv"));
  EXPECT_EQ(r.size(), 9u);
  EXPECT_EQ(r.surface_form("oWant"), "As a result, others want:");
  EXPECT_EQ(r.surface_form("xAttr"), "PersonX is seen as:");
}

TEST(KgStore, GraphRejectsUnregisteredRelation) {
  EXPECT_ERROR_KIND(KnowledgeGraph(RelationRegistry::defaults(), {{"h", "oWant", "t", Split::kTrain}}), ErrorKind::kInvariant);
  EXPECT_ERROR_KIND(KnowledgeGraph(RelationRegistry::defaults(), {{"h", "xAttr", " ", Split::kTrain}}), ErrorKind::kInvariant);
}

class FixtureGraph : public ::testing::Test {
 protected:
  static RelationRegistry registry() {
    auto r = RelationRegistry::defaults();
    r.load_file(fixture("relations_extra.tsv"));
    return r;
  }
};

TEST_F(FixtureGraph, LoadingTwiceIsByteEqual) {
  auto a = load_triples(fixture("graph.tsv"), registry());
  auto b = load_triples(fixture("graph.tsv"), registry());
  EXPECT_EQ(a.graph.serialize(), b.graph.serialize());
  EXPECT_TRUE(a.graph == b.graph);
}

TEST_F(FixtureGraph, ReserializedLoadIsIdempotent) {
  auto a = load_triples(fixture("graph.tsv"), registry());
  auto b = parse_triples(a.graph.serialize(), registry());
  EXPECT_TRUE(a.graph == b.graph);
  EXPECT_EQ(b.report.duplicates, 0u);
  EXPECT_EQ(parse_triples(b.graph.serialize(), registry()).graph.serialize(), a.graph.serialize());
}

TEST_F(FixtureGraph, HeadIndexCoversEveryTripleOnce) {
  auto g = load_triples(fixture("graph.tsv"), registry()).graph;
  std::vector<int> seen(g.triples().size(), 0);
  std::size_t heads = 0;
  for (auto split : kAllSplits) {
    for (const auto& h : g.heads(split)) {
      ++heads;
      for (auto i : g.triples_of(h)) {
        EXPECT_EQ(g.triples()[i].head, h);
        ++seen[i];
      }
    }
  }
  EXPECT_EQ(heads, g.head_count());
  for (auto n : seen) EXPECT_EQ(n, 1);
}

TEST_F(FixtureGraph, MeetsHermeticRunShape) {
  auto g = load_triples(fixture("graph.tsv"), registry()).graph;
  auto train = g.heads(Split::kTrain);
  EXPECT_GE(g.head_count(), 20u);
  for (const auto& h : train) {
    std::set<std::string> rels;
    for (auto i : g.triples_of(h)) rels.insert(g.triples()[i].relation);
    EXPECT_GE(rels.size(), 7u) << h;
  }
}

}  // namespace
}  // namespace csdial
