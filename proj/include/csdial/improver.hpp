#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "csdial/dataset_store.hpp"
#include "csdial/llm_gateway.hpp"

namespace csdial {

enum class Mode { kDirect, kMultistep, kNlhf };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct ImprovementCase {
  std::string sample_id;
  std::vector<Turn> context;
  std::string baseline;  // r̄, or its rephrasing on the inference path
  std::optional<std::string> human_feedback;
  std::optional<std::string> predicted_feedback;
  Mode mode = Mode::kDirect;
};

// Returns an empty string when the case carries exactly the fields its mode
// licenses.
std::string check_case(const ImprovementCase& c);

struct ImprovementResult {
  std::string sample_id;
  Mode mode = Mode::kDirect;
  std::string baseline;
  std::optional<std::string> feedback;  // f* (nlhf) or f̂ (multistep)
  std::string improved;
  bool no_improvement = false;  // output still token-equal to the baseline
  bool rephrased = false;

  bool operator==(const ImprovementResult&) const = default;
};

// Critique of the invalid response. Throws kPrecondition on empty input.
std::string predict_feedback(const std::vector<Turn>& context, const std::string& invalid_response, Gateway& gateway);

// Throws kPrecondition when the case violates its mode's invariants.
ImprovementResult improve(const ImprovementCase& c, Gateway& gateway, int max_retries = kDefaultSynthesisRetries);

struct RephraseLogEntry {
  std::string sample_id;
  std::string original;
  std::string rephrased;
  bool fell_back = false;
};

struct InferenceOptions {
  bool rephrase = true;
  std::size_t workers = 1;
  int max_retries = kDefaultSynthesisRetries;
};

struct InferenceRun {
  Mode mode = Mode::kDirect;
  std::vector<ImprovementResult> results;
  std::vector<RephraseLogEntry> rephrase_log;
  std::size_t no_improvement = 0;
  std::vector<std::string> skipped;  // nlhf samples without human feedback
};

// Builds one case per sample (nlhf uses the earliest human feedback record;
// multistep predicts f̂ first) and runs it. Rephrasing, when enabled, is
// applied to r̄ here and nowhere else.
InferenceRun run_inference(const std::vector<Sample>& samples, Mode mode, Gateway& gateway,
                           const InferenceOptions& options = {});

void write_inference(const std::filesystem::path& path, const InferenceRun& run);
std::vector<ImprovementResult> read_inference(const std::filesystem::path& path);
void write_rephrase_log(const std::filesystem::path& path, const std::vector<RephraseLogEntry>& log);
std::vector<RephraseLogEntry> read_rephrase_log(const std::filesystem::path& path);

struct TrainingExport {
  std::vector<FinetunePair> pairs;
  std::vector<std::string> incomplete_samples;  // fewer than 2 feedback records
  std::vector<std::string> warnings;
};

// Training pairs built from stored samples only; rephrased text never enters.
//   direct:            context + r̄        -> r   (one per sample)
//   feedback:          context + r̄        -> f   (one per human record)
//   improve_nlhf/_multistep: context + r̄ + f -> r (one per human record)
TrainingExport export_training(const std::vector<Sample>& samples, FinetuneMode mode);

struct AuditReport {
  std::size_t checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return checked > 0 && violations.empty(); }
};

// Inspects the captured improve prompts of a run: direct prompts carry no
// feedback, nlhf prompts carry exactly the earliest human feedback, multistep
// prompts carry exactly the critique the feedback model returned.
AuditReport audit_mode_isolation(const InferenceRun& run, const std::vector<Sample>& samples,
                                 const std::vector<PromptCapture::Entry>& captured);

// Every captured improve and feedback prompt shows the rephrased baseline, and
// no exported training pair contains a rephrased string.
AuditReport audit_rephrase_placement(const std::vector<RephraseLogEntry>& log,
                                     const std::vector<PromptCapture::Entry>& captured,
                                     const std::vector<FinetunePair>& exported);

}  // namespace csdial
