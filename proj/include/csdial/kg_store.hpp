#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csdial {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view label);
std::optional<Split> try_parse_split(std::string_view label);
inline constexpr Split kAllSplits[] = {Split::kTrain, Split::kVal, Split::kTest};

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  Split split = Split::kTrain;

  bool operator==(const Triple&) const = default;
};

// Maps relation tags to the prefix text used when rendering template lines.
class RelationRegistry {
 public:
  // The six PersonX relations with their stock renderings.
  static RelationRegistry defaults();

  // Reads `tag<TAB>surface form` lines; entries add to or replace existing ones.
  void load_file(const std::filesystem::path& path);
  void add(std::string tag, std::string surface_form);

  bool contains(std::string_view tag) const;
  const std::string& surface_form(std::string_view tag) const;
  std::size_t size() const { return forms_.size(); }
  const std::map<std::string, std::string, std::less<>>& entries() const { return forms_; }

  std::string serialize() const;
  bool operator==(const RelationRegistry&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> forms_;
};

class KnowledgeGraph {
 public:
  // Throws kInvariant if a triple is empty or uses an unregistered relation.
  KnowledgeGraph(RelationRegistry registry, std::vector<Triple> triples);

  const std::vector<Triple>& triples() const { return triples_; }
  const RelationRegistry& registry() const { return registry_; }

  // Indices into triples() rooted at `head`, in load order. Empty if unknown.
  const std::vector<std::size_t>& triples_of(std::string_view head) const;

  // Heads whose triple count within `split` is at least `min_degree`, sorted.
  std::vector<std::string> heads(Split split, std::size_t min_degree = 0) const;

  std::size_t head_count() const { return head_index_.size(); }

  // Canonical TSV form, one triple per line in load order.
  std::string serialize() const;

  bool operator==(const KnowledgeGraph& other) const {
    return triples_ == other.triples_ && registry_ == other.registry_;
  }

 private:
  RelationRegistry registry_;
  std::vector<Triple> triples_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> head_index_;
};

struct LoadReport {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::size_t skipped_unknown_relation = 0;
  std::size_t skipped_empty = 0;
  std::size_t duplicates = 0;
  std::map<std::string, std::size_t> unknown_relations;
};

struct LoadedGraph {
  KnowledgeGraph graph;
  LoadReport report;
};

// Parses a 4-column TSV (head, relation, tail, split). Unknown relations are
// tallied and skipped; exact duplicate (head, relation, tail) triples are
// dropped. Throws kIngestion for unreadable or malformed files and
// kEmptyGraph when no record survives.
LoadedGraph load_triples(const std::filesystem::path& path,
                         const RelationRegistry& registry = RelationRegistry::defaults());
LoadedGraph parse_triples(std::string_view contents,
                          const RelationRegistry& registry = RelationRegistry::defaults());

}  // namespace csdial
