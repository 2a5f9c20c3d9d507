#include "csdial/template_builder.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "csdial/error.hpp"
#include "csdial/parallel.hpp"
#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {
namespace {

struct RelationGroup {
  std::string relation;
  std::vector<std::string> tails;
};

// Relations of `head` within `split`, in first-seen load order.
std::vector<RelationGroup> relation_groups(const KnowledgeGraph& graph, std::string_view head, Split split) {
  std::vector<RelationGroup> groups;
  for (auto idx : graph.triples_of(head)) {
    const auto& t = graph.triples()[idx];
    if (t.split != split) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.relation == t.relation; });
    if (it == groups.end()) {
      groups.push_back({t.relation, {t.tail}});
    } else {
      it->tails.push_back(t.tail);
    }
  }
  return groups;
}

}  // namespace

int sample_turn_count(Rng& rng) { return kMinTurns + static_cast<int>(rng.below(kMaxTurns - kMinTurns + 1)); }

DialogueTemplate build_template(const KnowledgeGraph& graph, const std::string& head, int turn_count, Split split,
                                Rng& rng) {
  if (turn_count < kMinTurns || turn_count > kMaxTurns)
    throw Error(ErrorKind::kPrecondition, "turn_count " + std::to_string(turn_count) + " outside [3, 8]");
  auto groups = relation_groups(graph, head, split);
  const auto need = static_cast<std::size_t>(turn_count - 1);
  if (groups.size() < need)
    throw Error(ErrorKind::kUnderfullHead, "head '" + head + "' has " + std::to_string(groups.size()) +
                                               " relations in " + std::string(to_string(split)) + ", needs " +
                                               std::to_string(need));

  DialogueTemplate tmpl;
  tmpl.head = head;
  tmpl.turn_count = turn_count;
  tmpl.split = split;
  for (std::size_t k = 0; k < need; ++k) {
    auto pick = k + rng.below(groups.size() - k);
    std::swap(groups[k], groups[pick]);
    auto tail_pick = rng.below(groups[k].tails.size());
    tmpl.seed_trace.push_back(pick);
    tmpl.seed_trace.push_back(tail_pick);
    tmpl.lines.push_back({groups[k].relation, groups[k].tails[tail_pick]});
  }
  std::string key = head;
  for (const auto& l : tmpl.lines) key += "\x1f" + l.relation + "\x1f" + l.tail;
  tmpl.template_id = "tpl-" + text::hex64(text::fnv1a64(key));
  return tmpl;
}

DialogueTemplate build_template(const KnowledgeGraph& graph, const std::string& head, int turn_count, Rng& rng) {
  const auto& idx = graph.triples_of(head);
  if (idx.empty()) throw Error(ErrorKind::kUnderfullHead, "head '" + head + "' is not in the graph");
  const Split split = graph.triples()[idx.front()].split;
  for (auto i : idx)
    if (graph.triples()[i].split != split)
      throw Error(ErrorKind::kPrecondition, "head '" + head + "' spans more than one split");
  return build_template(graph, head, turn_count, split, rng);
}

std::string render_template(const DialogueTemplate& tmpl, const RelationRegistry& registry) {
  std::string out = tmpl.head;
  for (const auto& line : tmpl.lines) {
    out += "\n↪ ";
    out += registry.surface_form(line.relation);
    out += ' ';
    out += line.tail;
  }
  return out;
}

std::string check_template(const DialogueTemplate& tmpl, const KnowledgeGraph* graph) {
  if (tmpl.turn_count < kMinTurns || tmpl.turn_count > kMaxTurns)
    return "turn_count " + std::to_string(tmpl.turn_count) + " outside [3, 8]";
  if (tmpl.lines.size() != static_cast<std::size_t>(tmpl.turn_count - 1))
    return "line count " + std::to_string(tmpl.lines.size()) + " does not match turn_count " +
           std::to_string(tmpl.turn_count);
  std::set<std::string_view> seen;
  for (const auto& line : tmpl.lines)
    if (!seen.insert(line.relation).second) return "duplicate relation " + line.relation;
  if (graph) {
    for (const auto& line : tmpl.lines) {
      bool found = false;
      for (auto idx : graph->triples_of(tmpl.head)) {
        const auto& t = graph->triples()[idx];
        if (t.relation == line.relation && t.tail == line.tail && t.split == tmpl.split) {
          found = true;
          break;
        }
      }
      if (!found) return "line (" + line.relation + ", " + line.tail + ") is not a triple of the head in split";
    }
  }
  return {};
}

std::vector<DialogueTemplate> build_corpus(const KnowledgeGraph& graph, Split split, std::size_t target_count,
                                           std::uint64_t master_seed, std::size_t workers, CorpusStats* stats) {
  if (target_count == 0) return {};

  // eligible[t] lists heads with at least t - 1 distinct relations in split.
  std::array<std::vector<std::string>, kMaxTurns + 1> eligible;
  for (const auto& head : graph.heads(split, 1)) {
    const auto distinct = relation_groups(graph, head, split).size();
    for (int t = kMinTurns; t <= kMaxTurns; ++t)
      if (distinct >= static_cast<std::size_t>(t - 1)) eligible[t].push_back(head);
  }
  if (eligible[kMinTurns].empty())
    throw CapacityError("no head in split " + std::string(to_string(split)) +
                            " has the two distinct relations a 3-turn template needs",
                        0);

  const std::string stream = "templates/" + std::string(to_string(split));
  std::vector<DialogueTemplate> out(target_count);
  std::vector<char> reduced(target_count, 0);
  parallel_for(target_count, workers, [&](std::size_t i) {
    const auto seed = derive_seed(master_seed, stream, i);
    Rng rng(seed);
    const int drawn = sample_turn_count(rng);
    int turns = drawn;
    while (eligible[turns].empty()) --turns;
    const auto& heads = eligible[turns];
    const auto head_pick = rng.below(heads.size());
    auto tmpl = build_template(graph, heads[head_pick], turns, split, rng);
    std::vector<std::uint64_t> trace{seed, static_cast<std::uint64_t>(drawn), head_pick};
    trace.insert(trace.end(), tmpl.seed_trace.begin(), tmpl.seed_trace.end());
    tmpl.seed_trace = std::move(trace);
    tmpl.template_id = "tpl-" + std::string(to_string(split)) + "-" + [&] {
      auto s = std::to_string(i);
      return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
    }();
    reduced[i] = turns != drawn;
    out[i] = std::move(tmpl);
  });
  if (stats) stats->reduced_turn_counts = static_cast<std::size_t>(std::count(reduced.begin(), reduced.end(), 1));
  return out;
}

void write_templates(const std::filesystem::path& path, const std::vector<DialogueTemplate>& templates) {
  std::string out;
  for (const auto& t : templates) out += codec::to_json(t).dump() + "\n";
  fs::write_file_atomic(path, out);
}

std::vector<DialogueTemplate> read_templates(const std::filesystem::path& path) {
  return codec::read_jsonl<DialogueTemplate>(path, [](const codec::Json& j) { return codec::template_from_json(j); });
}

}  // namespace csdial
