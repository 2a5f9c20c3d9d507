#include "csdial/synthesizer.hpp"

#include "csdial/metrics.hpp"
#include "csdial/prompts.hpp"
#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {

std::vector<Turn> Dialogue::context() const {
  if (turns.empty()) return {};
  return std::vector<Turn>(turns.begin(), turns.end() - 1);
}

const std::string& Dialogue::valid_response() const {
  if (turns.empty()) throw Error(ErrorKind::kPrecondition, "dialogue " + dialogue_id + " has no turns");
  return turns.back().text;
}

std::string render_context(const std::vector<Turn>& turns) {
  std::vector<prompts::ContextTurn> ctx;
  ctx.reserve(turns.size());
  for (const auto& t : turns) ctx.push_back({t.speaker, t.text});
  return prompts::render_context(ctx);
}

std::optional<std::vector<Turn>> parse_dialogue(std::string_view text, int expected_turns) {
  std::vector<Turn> turns;
  for (const auto& raw : text::split_lines(text)) {
    auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line.size() < 2 || (line[0] != 'A' && line[0] != 'B') || line[1] != ':') return std::nullopt;
    const char expected = turns.size() % 2 == 0 ? 'A' : 'B';
    if (line[0] != expected) return std::nullopt;
    auto utterance = text::normalize_space(line.substr(2));
    if (utterance.empty()) return std::nullopt;
    turns.push_back({line[0], std::move(utterance)});
  }
  if (static_cast<int>(turns.size()) != expected_turns) return std::nullopt;
  return turns;
}

std::string check_dialogue(const Dialogue& dialogue, int expected_turns) {
  if (static_cast<int>(dialogue.turns.size()) != expected_turns)
    return "turn count " + std::to_string(dialogue.turns.size()) + " != " + std::to_string(expected_turns);
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    if (dialogue.turns[i].speaker != (i % 2 == 0 ? 'A' : 'B')) return "speakers do not alternate at turn " + std::to_string(i);
    if (text::trim(dialogue.turns[i].text).empty()) return "empty utterance at turn " + std::to_string(i);
  }
  return {};
}

bool same_tokens(std::string_view a, std::string_view b) {
  return metrics::tokenize(a).tokens == metrics::tokenize(b).tokens;
}

Dialogue naturalize(const DialogueTemplate& tmpl, const RelationRegistry& registry, Gateway& gateway,
                    int max_retries) {
  const auto prompt = prompts::naturalize_prompt(render_template(tmpl, registry));
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto result = gateway.complete(gateway.make_request(Purpose::kNaturalize, prompt, attempt));
    if (auto turns = parse_dialogue(result.text, tmpl.turn_count)) {
      Dialogue d;
      d.dialogue_id = "dlg-" + tmpl.template_id;
      d.template_id = tmpl.template_id;
      d.turns = std::move(*turns);
      d.split = tmpl.split;
      return d;
    }
  }
  throw Error(ErrorKind::kSynthesisReject, "template " + tmpl.template_id + ": no parseable " +
                                               std::to_string(tmpl.turn_count) + "-turn dialogue after " +
                                               std::to_string(max_retries + 1) + " attempts");
}

CorruptedPair inject_error(const Dialogue& dialogue, Gateway& gateway, int max_retries) {
  if (dialogue.turns.empty() || text::trim(dialogue.valid_response()).empty())
    throw Error(ErrorKind::kPrecondition, "dialogue " + dialogue.dialogue_id + " has no valid response");
  const auto& valid = dialogue.valid_response();
  const auto prompt = prompts::negate_prompt(render_context(dialogue.context()), valid);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto result = gateway.complete(gateway.make_request(Purpose::kNegate, prompt, attempt));
    auto invalid = text::normalize_space(prompts::strip_label(result.text, prompts::kOppositeCue));
    if (!invalid.empty() && !same_tokens(invalid, valid))
      return CorruptedPair{dialogue.dialogue_id, valid, std::move(invalid), std::nullopt};
  }
  throw Error(ErrorKind::kInjectionFailure,
              "dialogue " + dialogue.dialogue_id + ": backend kept returning the original response");
}

RephraseResult rephrase(std::string_view response, Gateway& gateway, int max_retries) {
  if (text::trim(response).empty()) throw Error(ErrorKind::kPrecondition, "cannot rephrase an empty response");
  const auto prompt = prompts::rephrase_prompt(response);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto result = gateway.complete(gateway.make_request(Purpose::kRephrase, prompt, attempt));
    auto out = text::normalize_space(prompts::strip_label(result.text, prompts::kRephraseCue));
    if (!out.empty() && !same_tokens(out, response)) return {std::move(out), false};
  }
  return {std::string(text::trim(response)), true};
}

void write_dialogues(const std::filesystem::path& path, const std::vector<Dialogue>& dialogues) {
  std::string out;
  for (const auto& d : dialogues) out += codec::to_json(d).dump() + "\n";
  fs::write_file_atomic(path, out);
}

std::vector<Dialogue> read_dialogues(const std::filesystem::path& path) {
  return codec::read_jsonl<Dialogue>(path, [](const codec::Json& j) { return codec::dialogue_from_json(j); });
}

}  // namespace csdial
