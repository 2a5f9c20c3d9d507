#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "csdial/dataset_store.hpp"
#include "csdial/feedback_service.hpp"
#include "csdial/metrics.hpp"

namespace csdial {

enum class EvalTask { kFeedbackGeneration, kResponseImprovement };
std::string_view to_string(EvalTask task);

enum class Metric { kRouge1, kRouge2, kRougeL, kBleu, kMeteor, kSacreBleu, kBertScore };
std::string_view metric_label(Metric metric);

// Row orders of the two published tables.
inline constexpr Metric kFeedbackRows[] = {Metric::kRouge1,    Metric::kRouge2, Metric::kRougeL, Metric::kBertScore,
                                           Metric::kSacreBleu, Metric::kBleu,   Metric::kMeteor};
inline constexpr Metric kImprovementRows[] = {Metric::kRouge1, Metric::kRouge2,    Metric::kRougeL,   Metric::kBleu,
                                              Metric::kMeteor, Metric::kSacreBleu, Metric::kBertScore};

// Column labels for response improvement, in table order.
inline constexpr std::string_view kImprovementColumns[] = {"Baseline-Direct", "Baseline-NLHF", "Direct", "Multistep",
                                                           "NLHF"};

struct SystemScores {
  std::string system;
  std::size_t samples = 0;
  std::map<Metric, metrics::MultiRefScore> cells;
};

struct EvalRun {
  EvalTask task = EvalTask::kFeedbackGeneration;
  Split split = Split::kTest;
  std::vector<SystemScores> systems;
  std::map<std::string, std::string> provenance;
};

struct EvalOptions {
  // Model-based column; the mock stands in when no real scorer is wired up.
  metrics::ExternalScorer external_scorer = metrics::mock_external_score;
  std::string external_scorer_name = "mock-dice";
  std::size_t workers = 1;
};

using Predictions = std::map<std::string, std::string, std::less<>>;  // sample_id -> text

// Scores one system's feedback predictions against the two human feedback
// records of every sample in `split`. Sentence-level metrics aggregate
// max/min/avg per sample, then average over samples; SacreBLEU is corpus
// BLEU against each reference set, then aggregated. Throws kCoverage listing
// the sample ids that lack a prediction or two references.
SystemScores evaluate_feedback(const std::string& system, const Predictions& predictions,
                               std::span<const Sample> samples, Split split, const EvalOptions& options = {});

// Scores one column of improved responses against the valid responses.
SystemScores evaluate_improvement(const std::string& system, const Predictions& predictions,
                                  std::span<const Sample> samples, Split split, const EvalOptions& options = {});

// Fixed-width text table; feedback runs show max/min/avg per system.
std::string render_eval_table(const EvalRun& run);
std::string eval_to_json(const EvalRun& run);

// (ours - baseline) / baseline. Throws kDomain for baseline <= 0.
double relative_improvement(double ours, double baseline);

// Fraction of judgments won by `system`. Throws kInput when empty.
double preference_rate(std::span<const PreferenceJudgment> judgments, SystemLabel system);

}  // namespace csdial
