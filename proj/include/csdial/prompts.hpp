#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csdial::prompts {

// Bumped whenever any scaffold or exemplar text changes; recorded in run
// manifests since cached generations are keyed on the exact prompt.
inline constexpr std::string_view kAssetVersion = "1";

// Field labels shared by the prompt builders and anything that parses prompts
// back (the mock backend, audits).
inline constexpr std::string_view kTemplateLabel = "Template:";
inline constexpr std::string_view kDialogueLabel = "Dialogue:";
inline constexpr std::string_view kContextLabel = "Dialogue Context:";
inline constexpr std::string_view kResponseLabel = "Response: ";
inline constexpr std::string_view kOppositeCue = "Opposite Response:";
inline constexpr std::string_view kTextLabel = "Text: ";
inline constexpr std::string_view kRephraseCue = "Rephrased:";
inline constexpr std::string_view kBaselineLabel = "Baseline Response: ";
inline constexpr std::string_view kFeedbackLabel = "Feedback: ";
inline constexpr std::string_view kFeedbackCue = "\n\nFeedback:";
inline constexpr std::string_view kImprovedCue = "\n\nImproved Response:";
inline constexpr std::string_view kImprovedLabel = "Improved Response:";

struct Exemplar {
  std::string_view rendered_template;
  std::string_view dialogue;  // one "A: ..." / "B: ..." line per turn
};

// The fixed in-context examples for naturalization (15 entries).
const std::vector<Exemplar>& naturalize_exemplars();

std::string_view naturalize_instruction();
std::string_view negate_instruction();
std::string_view rephrase_instruction();
std::string_view feedback_instruction();
std::string_view improve_direct_instruction();
std::string_view improve_with_feedback_instruction();

// Turns rendered as "A: ..." lines joined by newlines.
struct ContextTurn {
  char speaker;
  std::string_view text;
};
std::string render_context(const std::vector<ContextTurn>& turns);

std::string naturalize_prompt(std::string_view rendered_template);
std::string negate_prompt(std::string_view context, std::string_view response);
std::string rephrase_prompt(std::string_view response);
std::string feedback_prompt(std::string_view context, std::string_view invalid_response);
// Direct layout when feedback is absent; the feedback line is added otherwise.
std::string improve_prompt(std::string_view context, std::string_view baseline,
                           std::optional<std::string_view> feedback);

// Last value following `label` at the start of a line, up to end of line.
std::optional<std::string> last_field(std::string_view prompt, std::string_view label);

// Text after the final occurrence of `label` in a generation, trimmed. Returns
// the whole trimmed output when the label is absent.
std::string strip_label(std::string_view output, std::string_view label);

}  // namespace csdial::prompts
