#include "csdial/kg_store.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "csdial/error.hpp"
#include "csdial/text.hpp"

namespace csdial {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> try_parse_split(std::string_view label) {
  if (label == "train") return Split::kTrain;
  if (label == "val" || label == "dev" || label == "validation") return Split::kVal;
  if (label == "test") return Split::kTest;
  return std::nullopt;
}

Split parse_split(std::string_view label) {
  if (auto s = try_parse_split(label)) return *s;
  throw Error(ErrorKind::kInput, "unknown split label '" + std::string(label) + "'");
}

RelationRegistry RelationRegistry::defaults() {
  RelationRegistry r;
  r.add("xAttr", "PersonX is seen as:");
  r.add("xReact", "As a result, PersonX feels:");
  r.add("xNeed", "Before that, PersonX needed:");
  r.add("xWant", "As a result, PersonX wants:");
  r.add("xEffect", "As a result, PersonX will:");
  r.add("xIntent", "PersonX wanted:");
  return r;
}

void RelationRegistry::add(std::string tag, std::string surface_form) {
  tag = text::normalize_space(tag);
  surface_form = text::normalize_space(surface_form);
  if (tag.empty() || surface_form.empty())
    throw Error(ErrorKind::kInput, "relation registry entries need a tag and a surface form");
  forms_[std::move(tag)] = std::move(surface_form);
}

void RelationRegistry::load_file(const std::filesystem::path& path) {
  std::string contents;
  try {
    contents = fs::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIngestion, e.what());
  }
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(contents)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorKind::kIngestion,
                  path.string() + ":" + std::to_string(line_no) + ": expected tag<TAB>surface form");
    add(line.substr(0, tab), line.substr(tab + 1));
  }
}

bool RelationRegistry::contains(std::string_view tag) const { return forms_.find(tag) != forms_.end(); }

const std::string& RelationRegistry::surface_form(std::string_view tag) const {
  auto it = forms_.find(tag);
  if (it == forms_.end())
    throw Error(ErrorKind::kRegistryMiss, "relation '" + std::string(tag) + "' is not registered");
  return it->second;
}

std::string RelationRegistry::serialize() const {
  std::string out;
  for (const auto& [tag, form] : forms_) out += tag + "\t" + form + "\n";
  return out;
}

KnowledgeGraph::KnowledgeGraph(RelationRegistry registry, std::vector<Triple> triples)
    : registry_(std::move(registry)), triples_(std::move(triples)) {
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    if (text::trim(t.head).empty() || text::trim(t.tail).empty())
      throw Error(ErrorKind::kInvariant, "triple " + std::to_string(i) + " has empty head or tail");
    if (!registry_.contains(t.relation))
      throw Error(ErrorKind::kInvariant, "triple " + std::to_string(i) + " uses unregistered relation '" +
                                             t.relation + "'");
    head_index_[t.head].push_back(i);
  }
}

const std::vector<std::size_t>& KnowledgeGraph::triples_of(std::string_view head) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = head_index_.find(head);
  return it == head_index_.end() ? kEmpty : it->second;
}

std::vector<std::string> KnowledgeGraph::heads(Split split, std::size_t min_degree) const {
  std::vector<std::string> out;
  for (const auto& [head, idx] : head_index_) {
    auto degree = static_cast<std::size_t>(
        std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return triples_[i].split == split; }));
    if (degree > 0 && degree >= min_degree) out.push_back(head);
  }
  return out;  // std::map iteration is already lexicographic
}

std::string KnowledgeGraph::serialize() const {
  std::string out;
  for (const auto& t : triples_) {
    out += t.head;
    out += '\t';
    out += t.relation;
    out += '\t';
    out += t.tail;
    out += '\t';
    out += to_string(t.split);
    out += '\n';
  }
  return out;
}

LoadedGraph parse_triples(std::string_view contents, const RelationRegistry& registry) {
  LoadReport report;
  std::vector<Triple> triples;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(contents)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    ++report.records;
    auto fields = text::split(line, '\t');
    if (fields.size() < 4)
      throw Error(ErrorKind::kIngestion, "line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                                             std::to_string(fields.size()));
    Triple t;
    t.head = text::normalize_space(fields[0]);
    t.relation = std::string(text::trim(fields[1]));
    t.tail = text::normalize_space(fields[2]);
    auto split = try_parse_split(text::trim(fields[3]));
    if (!split)
      throw Error(ErrorKind::kIngestion,
                  "line " + std::to_string(line_no) + ": unknown split '" + fields[3] + "'");
    t.split = *split;
    if (!registry.contains(t.relation)) {
      ++report.skipped_unknown_relation;
      ++report.unknown_relations[t.relation];
      continue;
    }
    if (t.head.empty() || t.tail.empty()) {
      ++report.skipped_empty;
      continue;
    }
    if (!seen.emplace(t.head, t.relation, t.tail).second) {
      ++report.duplicates;
      continue;
    }
    triples.push_back(std::move(t));
  }
  if (triples.empty()) throw Error(ErrorKind::kEmptyGraph, "no valid triples in input");
  report.accepted = triples.size();
  return LoadedGraph{KnowledgeGraph(registry, std::move(triples)), report};
}

LoadedGraph load_triples(const std::filesystem::path& path, const RelationRegistry& registry) {
  std::string contents;
  try {
    contents = fs::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIngestion, e.what());
  }
  return parse_triples(contents, registry);
}

}  // namespace csdial
