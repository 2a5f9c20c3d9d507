#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csdial/dataset_store.hpp"
#include "csdial/rng.hpp"

namespace csdial {

enum class TaskKind { kFeedback, kPreference };
std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

enum class SystemLabel { kA, kB };
enum class Side { kLeft, kRight };
std::string_view to_string(SystemLabel s);
std::string_view to_string(Side s);
SystemLabel parse_system(std::string_view name);
Side parse_side(std::string_view name);

// Two candidate responses to one context, compared for human-likeness.
struct PreferenceItem {
  std::string item_id;
  std::vector<Turn> context;
  std::string system_a;
  std::string system_b;

  bool operator==(const PreferenceItem&) const = default;
};

struct ShownOrder {
  SystemLabel left = SystemLabel::kA;
  SystemLabel right = SystemLabel::kB;
  bool operator==(const ShownOrder&) const = default;
};

// The system displayed on the chosen side.
SystemLabel resolve_winner(ShownOrder order, Side choice);

struct PreferenceJudgment {
  std::string judgment_id;
  std::string item_id;
  std::string annotator_id;
  ShownOrder shown_order;
  Side choice = Side::kLeft;
  SystemLabel resolved_winner = SystemLabel::kA;
  std::int64_t created_at = 0;

  bool operator==(const PreferenceJudgment&) const = default;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct AnnotationTask {
  std::string task_id;
  TaskKind kind = TaskKind::kFeedback;
  std::string subject_id;  // sample_id or item_id
  std::string annotator_id;
  std::vector<Turn> context;
  std::string response;  // feedback: the invalid response
  std::string left;      // preference: candidates in display order
  std::string right;
  ShownOrder shown_order;
  std::chrono::system_clock::time_point lease_expiry;
};

struct QueueConfig {
  std::chrono::seconds lease_ttl{15 * 60};
  std::size_t judgments_per_item = 2;
  std::size_t max_sentences = 4;
  std::size_t warn_sentences = 2;
  std::set<std::string> allowed_annotators;  // empty admits everyone
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> judgments_path;  // JSONL persistence
};

struct SubmittedFeedback {
  FeedbackRecord record;
  std::vector<std::string> warnings;
};

struct Progress {
  std::size_t samples = 0;
  std::size_t complete_samples = 0;
  std::size_t feedback_records = 0;
  std::size_t preference_items = 0;
  std::size_t judgments = 0;
  std::size_t active_leases = 0;
};

// Lease-based task queue over one split of a dataset store plus a set of
// preference items. All operations are atomic under one mutex.
class AnnotationQueue {
 public:
  AnnotationQueue(DatasetStore& store, Split split, std::vector<PreferenceItem> items = {}, QueueConfig config = {},
                  Clock clock = {});

  // A task the annotator has not answered and whose subject still needs
  // annotations, or nullopt. Throws kValidation for unknown annotators.
  std::optional<AnnotationTask> lease(TaskKind kind, const std::string& annotator_id);

  // Throws kConflict (already submitted), kLease (unknown, expired or held by
  // someone else), kValidation (bad text) and kCardinality (sample already has
  // two records).
  SubmittedFeedback submit_feedback(const std::string& task_id, const std::string& annotator_id,
                                    const std::string& text);
  PreferenceJudgment submit_preference(const std::string& task_id, const std::string& annotator_id, Side choice);

  Progress progress() const;
  std::vector<PreferenceJudgment> judgments() const;
  const QueueConfig& config() const { return config_; }

 private:
  void expire_leases();
  AnnotationTask& take_task(const std::string& task_id, const std::string& annotator_id, TaskKind kind);
  std::string next_id(std::string_view prefix);

  DatasetStore& store_;
  Split split_;
  std::vector<PreferenceItem> items_;
  QueueConfig config_;
  Clock clock_;
  Rng rng_;
  mutable std::mutex mu_;
  std::map<std::string, AnnotationTask> active_;
  std::set<std::string> retired_;
  std::vector<PreferenceJudgment> judgments_;
  std::uint64_t counter_ = 0;
};

// Reads {item_id, context: [{speaker, text}], system_a, system_b} lines.
std::vector<PreferenceItem> read_preference_items(const std::filesystem::path& path);
std::vector<PreferenceJudgment> read_judgments(const std::filesystem::path& path);

struct ServerConfig {
  std::string token;  // empty disables the check
  std::optional<std::filesystem::path> static_dir;
};

// HTTP front end:
//   GET  /tasks/next?kind=feedback|preference&annotator_id=...
//   POST /tasks/{id}/feedback    {"annotator_id", "text"}
//   POST /tasks/{id}/preference  {"annotator_id", "choice": "left"|"right"}
//   GET  /progress
class AnnotationServer {
 public:
  AnnotationServer(AnnotationQueue& queue, ServerConfig config = {});
  ~AnnotationServer();

  // Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void serve();
  // Blocks until serve() is accepting connections.
  void wait_until_ready();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace csdial
