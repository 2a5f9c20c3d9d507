#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csdial/kg_store.hpp"
#include "csdial/rng.hpp"

namespace csdial {

inline constexpr int kMinTurns = 3;
inline constexpr int kMaxTurns = 8;

struct TemplateLine {
  std::string relation;
  std::string tail;

  bool operator==(const TemplateLine&) const = default;
};

// A head event plus a star of its inferences; each line becomes one turn after
// the opening turn, so lines.size() == turn_count - 1.
struct DialogueTemplate {
  std::string template_id;
  std::string head;
  std::vector<TemplateLine> lines;
  int turn_count = 0;
  Split split = Split::kTrain;
  // Template seed followed by every draw taken while building it.
  std::vector<std::uint64_t> seed_trace;

  bool operator==(const DialogueTemplate&) const = default;
};

// Uniform over {3, ..., 8}.
int sample_turn_count(Rng& rng);

// Samples turn_count - 1 distinct relations of `head` (within `split`) without
// replacement, keeping draw order, and one tail per chosen relation. Throws
// kUnderfullHead when the head has too few distinct relations.
DialogueTemplate build_template(const KnowledgeGraph& graph, const std::string& head, int turn_count,
                                Split split, Rng& rng);

// Same, with the split taken from the head's triples (which must agree).
DialogueTemplate build_template(const KnowledgeGraph& graph, const std::string& head, int turn_count,
                                Rng& rng);

// Head line, then one `↪ <surface form> <tail>` line per template line.
std::string render_template(const DialogueTemplate& tmpl, const RelationRegistry& registry);

// Checks turn bounds, relation uniqueness, line count and (when a graph is
// given) that each line is a triple of the head in the template's split.
// Returns an empty string when valid, otherwise the first violation.
std::string check_template(const DialogueTemplate& tmpl, const KnowledgeGraph* graph = nullptr);

struct CorpusStats {
  std::size_t reduced_turn_counts = 0;  // templates that fell back to fewer turns
};

// Builds exactly target_count templates for `split`. Each template draws from
// its own stream derived from (master_seed, split, index), so output does not
// depend on `workers`. A drawn turn count that no head can support falls back
// to the next smaller count. Throws CapacityError when not even a 3-turn
// template can be built.
std::vector<DialogueTemplate> build_corpus(const KnowledgeGraph& graph, Split split, std::size_t target_count,
                                           std::uint64_t master_seed, std::size_t workers = 1,
                                           CorpusStats* stats = nullptr);

void write_templates(const std::filesystem::path& path, const std::vector<DialogueTemplate>& templates);
std::vector<DialogueTemplate> read_templates(const std::filesystem::path& path);

}  // namespace csdial
