#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csdial/kg_store.hpp"
#include "csdial/llm_gateway.hpp"
#include "csdial/template_builder.hpp"

namespace csdial {

inline constexpr int kDefaultSynthesisRetries = 3;

struct Turn {
  char speaker = 'A';  // 'A' or 'B'
  std::string text;

  bool operator==(const Turn&) const = default;
};

// A naturalized template: speakers alternate from A and the final turn is
// the valid response.
struct Dialogue {
  std::string dialogue_id;
  std::string template_id;
  std::vector<Turn> turns;
  Split split = Split::kTrain;

  std::vector<Turn> context() const;
  const std::string& valid_response() const;
  bool operator==(const Dialogue&) const = default;
};

// Context rendered as "A: ..." lines for prompts.
std::string render_context(const std::vector<Turn>& turns);

// An error-injected response. rephrased_invalid is only ever filled on the
// inference path.
struct CorruptedPair {
  std::string dialogue_id;
  std::string valid_response;
  std::string invalid_response;
  std::optional<std::string> rephrased_invalid;

  bool operator==(const CorruptedPair&) const = default;
};

// Parses "A: ..." / "B: ..." lines. Returns nullopt unless every non-blank
// line carries a speaker tag, speakers alternate from A and the turn count
// equals expected_turns.
std::optional<std::vector<Turn>> parse_dialogue(std::string_view text, int expected_turns);

// Returns an empty string for a well-formed dialogue, else the violation.
std::string check_dialogue(const Dialogue& dialogue, int expected_turns);

// Case-insensitive token-level equality (same tokenizer as the metrics).
bool same_tokens(std::string_view a, std::string_view b);

// Prompts with the instruction, the fixed exemplars and the rendered
// template; retries up to max_retries times on unparseable output or a turn
// count mismatch, then throws kSynthesisReject.
Dialogue naturalize(const DialogueTemplate& tmpl, const RelationRegistry& registry, Gateway& gateway,
                    int max_retries = kDefaultSynthesisRetries);

// Asks for the semantic opposite of the final turn given the context. Throws
// kPrecondition on an empty response and kInjectionFailure when every attempt
// comes back token-equal to the original.
CorruptedPair inject_error(const Dialogue& dialogue, Gateway& gateway, int max_retries = kDefaultSynthesisRetries);

struct RephraseResult {
  std::string text;
  bool fell_back = false;  // no distinct rephrasing obtained; text is the input
};

// Inference-time paraphrase noise. Throws kPrecondition on empty input.
RephraseResult rephrase(std::string_view response, Gateway& gateway, int max_retries = kDefaultSynthesisRetries);

void write_dialogues(const std::filesystem::path& path, const std::vector<Dialogue>& dialogues);
std::vector<Dialogue> read_dialogues(const std::filesystem::path& path);

}  // namespace csdial
