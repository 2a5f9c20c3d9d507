#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csdial/error.hpp"

namespace csdial {

enum class Purpose { kNaturalize, kNegate, kRephrase, kFeedback, kImprove };

std::string_view to_string(Purpose purpose);
Purpose parse_purpose(std::string_view name);

// Defaults are the generation hyperparameters used for every model call:
// temperature 0.7, 50 max tokens, top_p 1.0, no frequency/presence penalty.
struct GenerationRequest {
  std::string prompt;
  double temperature = 0.7;
  int max_tokens = 50;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
  std::string model_ref;
  Purpose purpose = Purpose::kImprove;
  // Retry index. Part of the cache key so a retry is a fresh generation.
  int variant = 0;
};

struct TokenEstimate {
  std::size_t prompt = 0;
  std::size_t completion = 0;
};

struct GenerationResult {
  std::string text;
  bool cached = false;
  std::chrono::duration<double> latency{0};
  TokenEstimate tokens;
  std::string backend_id;
};

// Raised by backends for failures worth retrying (timeouts, 429, 5xx).
class TransientError : public Error {
 public:
  explicit TransientError(const std::string& message) : Error(ErrorKind::kBackendUnavailable, message) {}
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Must be safe to call concurrently.
  virtual std::string generate(const GenerationRequest& request) = 0;
};

// Thread-safe record of every prompt handed to the gateway.
class PromptCapture {
 public:
  struct Entry {
    Purpose purpose;
    std::string model_ref;
    std::string prompt;
    std::string output;
  };

  void record(Entry entry);
  std::vector<Entry> entries() const;
  std::vector<Entry> entries(Purpose purpose) const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

// Minimum-spacing limiter: dispatches are spaced 1/rate seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second) : per_second_(per_second) {}
  void acquire();

 private:
  double per_second_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

struct SamplingParams {
  double temperature = 0.7;
  int max_tokens = 50;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
};

struct GatewayConfig {
  SamplingParams sampling;
  int max_attempts = 4;
  std::chrono::milliseconds base_backoff{200};
  std::chrono::milliseconds max_backoff{5000};
  bool cache_enabled = true;
  std::optional<std::filesystem::path> cache_dir;
  double rate_limit_per_second = 0.0;  // 0 disables limiting
  std::ptrdiff_t max_in_flight = 8;
  // Per-purpose max_tokens overrides. Whole-dialogue naturalization does not
  // fit the 50-token response budget.
  std::map<Purpose, int> max_tokens_profile{{Purpose::kNaturalize, 512}};
  // Per-purpose model identifiers; missing entries fall back to default_model.
  std::map<Purpose, std::string> model_refs;
  std::string default_model = "mock";
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayConfig config = {});

  // Request with default hyperparameters, the purpose's max_tokens profile
  // and the configured model_ref for that purpose.
  GenerationRequest make_request(Purpose purpose, std::string prompt, int variant = 0) const;

  // Retries transient failures with exponential backoff; serves identical
  // requests from cache when enabled. Throws kPrecondition on an empty
  // prompt, kBackendUnavailable once retries are exhausted and kProtocol for
  // malformed replies.
  GenerationResult complete(const GenerationRequest& request);

  void set_capture(std::shared_ptr<PromptCapture> capture) { capture_ = std::move(capture); }
  // Replaces the sleep used between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

  const GatewayConfig& config() const { return config_; }
  std::string backend_id() const { return backend_->id(); }

  std::size_t backend_calls() const;

 private:
  struct CacheEntry {
    std::string text;
    std::string backend_id;
  };

  std::optional<CacheEntry> cache_lookup(const std::string& key, const std::string& canonical);
  void cache_store(const std::string& key, const std::string& canonical, const CacheEntry& entry);

  std::shared_ptr<Backend> backend_;
  GatewayConfig config_;
  std::shared_ptr<PromptCapture> capture_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
  std::unique_ptr<RateLimiter> limiter_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex cache_mu_;
  std::unordered_map<std::string, CacheEntry> cache_;
  mutable std::mutex stats_mu_;
  std::size_t backend_calls_ = 0;
};

// Canonical serialization of every field that influences generation.
std::string canonical_request(const GenerationRequest& request);
std::string request_key(const GenerationRequest& request);

// ---------------------------------------------------------------------------
// Fine-tune training files

enum class FinetuneMode { kDirect, kFeedback, kImproveNlhf, kImproveMultistep };

std::string_view to_string(FinetuneMode mode);
FinetuneMode parse_finetune_mode(std::string_view name);

inline constexpr std::string_view kDefaultStopSequence = "\n";

struct FinetunePair {
  std::string prompt;
  std::string completion;
  FinetuneMode mode = FinetuneMode::kDirect;

  bool operator==(const FinetunePair&) const = default;
};

struct ExportSummary {
  std::size_t count = 0;
  std::uintmax_t bytes = 0;
  std::string checksum;  // fnv1a64 of the file bytes, hex
};

// One {"prompt","completion"} JSON object per line. Throws kPrecondition on an
// empty list or a pair violating its invariants, kIo on write failure.
ExportSummary export_finetune_file(const std::vector<FinetunePair>& pairs, const std::filesystem::path& path,
                                   std::string_view stop_sequence = kDefaultStopSequence);
std::vector<FinetunePair> read_finetune_file(const std::filesystem::path& path, FinetuneMode mode);

}  // namespace csdial
