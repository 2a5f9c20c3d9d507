#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csdial/synthesizer.hpp"

namespace csdial {

inline constexpr std::size_t kFeedbackTarget = 2;

enum class FeedbackSource { kHuman, kModel };

std::string_view to_string(FeedbackSource source);
FeedbackSource parse_feedback_source(std::string_view name);

struct FeedbackRecord {
  std::string record_id;
  std::string sample_id;
  std::string annotator_id;
  std::string text;
  std::int64_t created_at = 0;  // unix seconds
  FeedbackSource source = FeedbackSource::kHuman;

  bool operator==(const FeedbackRecord&) const = default;
};

// One annotated corpus entry {context, r, f, r̄}.
struct Sample {
  std::string sample_id;
  Dialogue dialogue;
  CorruptedPair corrupted;
  std::vector<FeedbackRecord> feedback;
  Split split = Split::kTrain;
  int template_turns = 0;

  // Exactly two human feedback records.
  bool complete() const;
  std::size_t human_feedback_count() const;
  bool operator==(const Sample&) const = default;
};

Sample make_sample(const Dialogue& dialogue, const CorruptedPair& corrupted, int template_turns);

// Returns an empty string when the sample satisfies its invariants.
std::string check_sample(const Sample& sample);

// Canonical single-line form; parse_sample(serialize_sample(s)) == s.
std::string serialize_sample(const Sample& sample);
Sample parse_sample(std::string_view line);

// Per-split line-delimited corpus files (`train.samples`, ...) plus an
// append-only `<split>.feedback` journal that is folded into samples on load
// and by compact(). All writes go through one mutex.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path split_path(Split split) const;
  bool has_split(Split split) const;

  // Throws kInvariant for an invalid sample, kConflict for a duplicate id.
  std::string append(const Sample& sample);

  // Samples of a split in append order with feedback merged in.
  std::vector<Sample> load(Split split) const;
  std::optional<Sample> find(std::string_view sample_id) const;
  std::size_t size(Split split) const;

  // Throws kNotFound, kCardinality (third human record), kConflict (same
  // annotator twice or duplicate record id) and kValidation (empty text).
  void add_feedback(const FeedbackRecord& record);

  // Rewrites each split file with its journal folded in.
  void compact();

 private:
  void ensure_loaded() const;
  std::filesystem::path journal_path(Split split) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable bool loaded_ = false;
  mutable std::map<Split, std::vector<Sample>> samples_;
  mutable std::map<std::string, std::pair<Split, std::size_t>, std::less<>> index_;
};

struct MomentStats {
  double mean = 0;
  double std = 0;  // sample convention (n - 1)
  bool degenerate = false;  // n == 1, std reported as 0
};

struct SplitStats {
  Split split = Split::kTrain;
  bool empty = true;
  std::size_t samples = 0;
  std::size_t complete = 0;
  std::size_t awaiting_feedback = 0;
  MomentStats template_turns;
  MomentStats dialogue_turns;
};

struct DatasetStats {
  std::vector<SplitStats> splits;
};

// Exact integer sums, so the result does not depend on value order.
MomentStats turn_moments(std::span<const int> values);

SplitStats compute_stats(std::span<const Sample> samples, Split split);
DatasetStats compute_stats(const DatasetStore& store);

// Human-readable table: one column per split, two-decimal mean ± std rows.
std::string render_stats_table(const DatasetStats& stats);
std::string stats_to_json(const DatasetStats& stats);

}  // namespace csdial
