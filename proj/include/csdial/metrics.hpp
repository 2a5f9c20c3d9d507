#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csdial::metrics {

// Lowercased word tokens. Text is split on Unicode whitespace; leading and
// trailing punctuation is stripped from each token, interior characters (such
// as the apostrophe in "that's") are kept, and tokens left empty are dropped.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source;
};

TokenSequence tokenize(std::string_view text);

struct ScoreTriple {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// f1 = 2PR / (P + R), or 0 when P + R == 0.
ScoreTriple make_score(double precision, double recall);

// Clipped n-gram overlap. Throws kInput for n < 1.
ScoreTriple rouge_n(std::string_view candidate, std::string_view reference, int n);
// Longest-common-subsequence precision/recall/F1.
ScoreTriple rouge_l(std::string_view candidate, std::string_view reference);

// Unsmoothed: geometric mean of modified 1..max_n-gram precisions times the
// brevity penalty; 0 when any precision is 0.
double bleu_sentence(std::string_view candidate, std::string_view reference, int max_n = 4);

// Pooled n-gram statistics over the corpus, scaled to [0, 100]. Throws kInput
// on empty input or mismatched lengths.
double bleu_corpus(std::span<const std::string> candidates, std::span<const std::string> references,
                   int max_n = 4);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  bool use_stemmer = true;
};

// Alignment keeps the maximal number of exact matches, then of stem matches
// among the leftovers, and among those picks one with the fewest chunks.
double meteor(std::string_view candidate, std::string_view reference, const MeteorParams& params = {});

// Light suffix stripper used for METEOR's stem stage.
std::string stem(std::string_view word);

struct MultiRefScore {
  std::vector<double> per_reference;
  double max = 0;
  double min = 0;
  double avg = 0;
};

using ScoreFn = std::function<double(std::string_view candidate, std::string_view reference)>;

// Scores the candidate against each reference independently. Throws kInput
// on an empty reference list.
MultiRefScore multi_ref(const ScoreFn& score_fn, std::string_view candidate,
                        std::span<const std::string> references);
MultiRefScore aggregate(std::vector<double> per_reference);

// Pluggable model-based scorer (e.g. BERTScore) supplied by the caller.
using ExternalScorer = ScoreFn;

// Deterministic stand-in for an external scorer: Dice overlap of token sets.
double mock_external_score(std::string_view candidate, std::string_view reference);

}  // namespace csdial::metrics
