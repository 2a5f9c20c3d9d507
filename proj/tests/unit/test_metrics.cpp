#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "csdial/metrics.hpp"
#include "csdial/text.hpp"
#include "support.hpp"

namespace csdial::metrics {
namespace {

constexpr double kTol = 1e-6;

struct GoldenRow {
  std::string id, candidate, reference;
  std::map<std::string, double> expected;
};

struct Golden {
  std::vector<GoldenRow> rows;
  struct Group {
    std::string name;
    std::vector<std::string> ids;
    double expected;
  };
  std::vector<Group> corpus;
};

const Golden& golden() {
  static const Golden g = [] {
    Golden out;
    auto lines = text::split_lines(fs::read_file(testing::data_path("golden/metrics_golden.tsv")));
    auto header = text::split(lines.at(0), '\t');
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto f = text::split(lines[i], '\t');
      if (f[0] == "#corpus") {
        out.corpus.push_back({f[1], text::split(f[2], ','), std::stod(f[3])});
        continue;
      }
      GoldenRow row{f[0], f[1], f[2], {}};
      for (std::size_t k = 3; k < f.size(); ++k) row.expected[header[k]] = std::stod(f[k]);
      out.rows.push_back(std::move(row));
    }
    return out;
  }();
  return g;
}

TEST(Golden, HasEnoughPairs) {
  EXPECT_GE(golden().rows.size(), 12u);
  EXPECT_GE(golden().corpus.size(), 1u);
}

TEST(Golden, RougeMatchesOracle) {
  for (const auto& row : golden().rows) {
    SCOPED_TRACE(row.id);
    auto r1 = rouge_n(row.candidate, row.reference, 1);
    auto r2 = rouge_n(row.candidate, row.reference, 2);
    auto rl = rouge_l(row.candidate, row.reference);
    EXPECT_NEAR(r1.precision, row.expected.at("rouge1_p"), kTol);
    EXPECT_NEAR(r1.recall, row.expected.at("rouge1_r"), kTol);
    EXPECT_NEAR(r1.f1, row.expected.at("rouge1_f"), kTol);
    EXPECT_NEAR(r2.precision, row.expected.at("rouge2_p"), kTol);
    EXPECT_NEAR(r2.recall, row.expected.at("rouge2_r"), kTol);
    EXPECT_NEAR(r2.f1, row.expected.at("rouge2_f"), kTol);
    EXPECT_NEAR(rl.precision, row.expected.at("rougeL_p"), kTol);
    EXPECT_NEAR(rl.recall, row.expected.at("rougeL_r"), kTol);
    EXPECT_NEAR(rl.f1, row.expected.at("rougeL_f"), kTol);
  }
}

TEST(Golden, BleuAndMeteorMatchOracle) {
  for (const auto& row : golden().rows) {
    SCOPED_TRACE(row.id);
    EXPECT_NEAR(bleu_sentence(row.candidate, row.reference), row.expected.at("bleu"), kTol);
    EXPECT_NEAR(meteor(row.candidate, row.reference), row.expected.at("meteor"), kTol);
  }
}

TEST(Golden, CorpusBleuMatchesOracle) {
  std::map<std::string, const GoldenRow*> by_id;
  for (const auto& row : golden().rows) by_id[row.id] = &row;
  for (const auto& group : golden().corpus) {
    std::vector<std::string> c, r;
    for (const auto& id : group.ids) {
      c.push_back(by_id.at(id)->candidate);
      r.push_back(by_id.at(id)->reference);
    }
    EXPECT_NEAR(bleu_corpus(c, r), group.expected, kTol) << group.name;
  }
}

TEST(Tokenize, DocumentedRules) {
  EXPECT_EQ(tokenize("That's great.").tokens, (std::vector<std::string>{"that's", "great"}));
  EXPECT_TRUE(tokenize("").tokens.empty());
  EXPECT_EQ(tokenize("  A  B ").tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(tokenize("\"Well,\" she said... (really)").tokens,
            (std::vector<std::string>{"well", "she", "said", "really"}));
  EXPECT_EQ(tokenize("a\xC2\xA0" "b\xE2\x80\x83" "c").tokens, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(tokenize("\xE2\x80\x9Cquoted\xE2\x80\x9D").tokens, (std::vector<std::string>{"quoted"}));
  EXPECT_EQ(tokenize("!!! ...").tokens.size(), 0u);
}

TEST(Rouge, SpecExamples) {
  auto s = rouge_n("the cat", "the cat sat on", 1);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-12);
  auto l = rouge_l("a c b", "a b c");
  EXPECT_NEAR(l.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(l.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(rouge_l("", "a b").f1, 0.0);
  EXPECT_ERROR_KIND(rouge_n("a", "a", 0), ErrorKind::kInput);
}

TEST(Rouge, ClippingKeepsPrecisionAtMostOne) {
  for (int reps = 1; reps < 12; ++reps) {
    std::string cand;
    for (int i = 0; i < reps; ++i) cand += "yes ";
    for (int n : {1, 2}) {
      auto s = rouge_n(cand, "yes yes no", n);
      EXPECT_LE(s.precision, 1.0);
      EXPECT_LE(s.recall, 1.0);
    }
  }
}

TEST(Bleu, BrevityPenaltyFixture) {
  EXPECT_NEAR(bleu_sentence("one two three four", "one two three four five"), std::exp(1.0 - 5.0 / 4.0), 1e-12);
  EXPECT_NEAR(bleu_sentence("a b c d e", "a b c d e"), 1.0, 1e-12);
  EXPECT_EQ(bleu_sentence("d c b a", "a b c d"), 0.0);
}

TEST(Bleu, CorpusOfOnePairIsHundredTimesSentence) {
  for (const auto& row : golden().rows) {
    std::vector<std::string> c{row.candidate}, r{row.reference};
    EXPECT_NEAR(bleu_corpus(c, r), 100.0 * bleu_sentence(row.candidate, row.reference), 1e-9) << row.id;
  }
  std::vector<std::string> c{"one two three four"}, r{"one two three four five"};
  EXPECT_NEAR(bleu_corpus(c, r), 77.88, 0.005);
}

TEST(Bleu, CorpusInputErrors) {
  std::vector<std::string> one{"a"}, two{"a", "b"}, none;
  EXPECT_ERROR_KIND(bleu_corpus(one, two), ErrorKind::kInput);
  EXPECT_ERROR_KIND(bleu_corpus(none, none), ErrorKind::kInput);
}

TEST(Meteor, IdentityOfThreeTokens) {
  EXPECT_NEAR(meteor("a b c", "a b c"), 1.0 - 0.5 / 27.0, 1e-12);
  EXPECT_NEAR(meteor("a b c", "a b c"), 0.98148, 1e-5);
}

TEST(Meteor, StemMatches) {
  EXPECT_NEAR(meteor("cats", "cat"), 0.5, 1e-12);
  MeteorParams exact_only;
  exact_only.use_stemmer = false;
  EXPECT_EQ(meteor("cats", "cat", exact_only), 0.0);
  EXPECT_EQ(stem("cats"), "cat");
  EXPECT_EQ(stem("walking"), "walk");
  EXPECT_EQ(stem("stopped"), "stop");
  EXPECT_EQ(stem("stories"), "story");
  EXPECT_EQ(stem("glass"), "glass");
  EXPECT_EQ(stem("is"), "is");
}

TEST(Meteor, PrefersFewestChunks) {
  // Matching the second "a" keeps "a b" contiguous: 2 chunks instead of 3.
  const double m = 3, p = 3.0 / 4.0, r = 1.0;
  const double fmean = p * r / (0.9 * p + 0.1 * r);
  EXPECT_NEAR(meteor("a c a b", "a b c"), fmean * (1 - 0.5 * std::pow(2 / m, 3)), 1e-12);
}

TEST(Meteor, RepeatedWordsStayTractable) {
  std::string s;
  for (int i = 0; i < 40; ++i) s += "the ";
  EXPECT_NEAR(meteor(s, s), 1.0 - 0.5 / (40.0 * 40.0 * 40.0), 1e-12);
}

TEST(Identity, EveryMetricAtItsMaximum) {
  for (std::string x : {"You should say no.", "a b c d", "I'm just annoyed and irritated today."}) {
    const double n = static_cast<double>(tokenize(x).tokens.size());
    EXPECT_DOUBLE_EQ(rouge_n(x, x, 1).f1, 1.0);
    EXPECT_DOUBLE_EQ(rouge_n(x, x, 2).f1, 1.0);
    EXPECT_DOUBLE_EQ(rouge_l(x, x).f1, 1.0);
    EXPECT_DOUBLE_EQ(bleu_sentence(x, x), 1.0);
    std::vector<std::string> v{x};
    EXPECT_NEAR(bleu_corpus(v, v), 100.0, 1e-9);
    EXPECT_NEAR(meteor(x, x), 1.0 - 0.5 / (n * n * n), 1e-12);
    EXPECT_DOUBLE_EQ(mock_external_score(x, x), 1.0);
  }
}

TEST(Disjoint, EveryMetricIsZero) {
  const std::string a = "alpha beta gamma delta", b = "one two three four";
  EXPECT_EQ(rouge_n(a, b, 1).f1, 0.0);
  EXPECT_EQ(rouge_n(a, b, 2).f1, 0.0);
  EXPECT_EQ(rouge_l(a, b).f1, 0.0);
  EXPECT_EQ(bleu_sentence(a, b), 0.0);
  EXPECT_EQ(meteor(a, b), 0.0);
  std::vector<std::string> c{a}, r{b};
  EXPECT_EQ(bleu_corpus(c, r), 0.0);
}

TEST(MakeScore, F1Convention) {
  EXPECT_EQ(make_score(0, 0).f1, 0.0);
  EXPECT_NEAR(make_score(0.5, 1.0).f1, 2 * 0.5 / 1.5, 1e-15);
}

TEST(MultiRef, ArithmeticIsExact) {
  auto s = aggregate({0.2, 0.4});
  EXPECT_NEAR(s.max, 0.4, 1e-9);
  EXPECT_NEAR(s.min, 0.2, 1e-9);
  EXPECT_NEAR(s.avg, 0.3, 1e-9);
  auto one = aggregate({0.7});
  EXPECT_EQ(one.max, one.min);
  EXPECT_EQ(one.avg, one.max);
  EXPECT_ERROR_KIND(aggregate({}), ErrorKind::kInput);
  std::vector<std::string> none;
  EXPECT_ERROR_KIND(multi_ref(mock_external_score, "x", none), ErrorKind::kInput);
}

TEST(MultiRef, PublishedFeedbackCellsAreConsistent) {
  // Max 0.315 and min 0.185 over two references average to 0.250.
  auto s = aggregate({0.315, 0.185});
  EXPECT_NEAR(s.avg, 0.250, 1e-9);
}

TEST(MultiRef, OrderingInvariant) {
  std::vector<std::string> refs = {"The other person already said no.",
                                   "The person did not say yes so this response was strange."};
  auto fn = [](std::string_view c, std::string_view r) { return rouge_n(c, r, 1).f1; };
  auto s = multi_ref(fn, "The person said no already.", refs);
  EXPECT_LE(s.min, s.avg);
  EXPECT_LE(s.avg, s.max);
  EXPECT_EQ(s.per_reference.size(), 2u);
  EXPECT_DOUBLE_EQ(s.per_reference[0], fn("The person said no already.", refs[0]));
}

TEST(Purity, RepeatedCallsAgree) {
  for (const auto& row : golden().rows) {
    EXPECT_EQ(meteor(row.candidate, row.reference), meteor(row.candidate, row.reference));
    EXPECT_EQ(bleu_sentence(row.candidate, row.reference), bleu_sentence(row.candidate, row.reference));
  }
}

}  // namespace
}  // namespace csdial::metrics
