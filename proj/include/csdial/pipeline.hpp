#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csdial/eval_harness.hpp"
#include "csdial/improver.hpp"
#include "csdial/llm_gateway.hpp"

namespace csdial {

struct ServeSettings {
  std::string addr = "127.0.0.1:8080";
  std::string token;
  std::optional<std::filesystem::path> static_dir;
  std::optional<std::filesystem::path> preference_items;
  int lease_ttl_seconds = 15 * 60;
  std::vector<std::string> annotators;
};

struct PipelineConfig {
  std::optional<std::filesystem::path> graph;
  std::optional<std::filesystem::path> relations;
  std::filesystem::path work_dir = "corpus";
  std::optional<std::filesystem::path> cache_dir;
  std::string backend = "mock";  // mock | remote
  std::string endpoint;
  std::string token;
  std::uint64_t seed = 0;
  SamplingParams sampling;
  int naturalize_max_tokens = 512;
  bool rephrase = true;
  std::map<Split, std::size_t> counts{{Split::kTrain, 60}, {Split::kVal, 10}, {Split::kTest, 10}};
  std::optional<Split> split;
  std::size_t workers = 1;
  int max_retries = kDefaultSynthesisRetries;
  double rate_limit = 0;
  // Keyed by purpose name, plus "baseline" for the untuned comparison model.
  std::map<std::string, std::string> models;
  ServeSettings serve;
};

// Dotted keys ("generation.temperature", "counts.train", "serve.addr", ...)
// mapped to JSON-encoded or bare string values.
using ConfigLayer = std::map<std::string, std::string>;

// Flattens a JSON config file into a layer. Throws kUsage on unreadable or
// malformed files.
ConfigLayer read_config_file(const std::filesystem::path& path);

// CSDIAL_* variables, with "." in a key written as "__"
// (CSDIAL_GENERATION__TEMPERATURE, CSDIAL_SEED).
ConfigLayer env_layer(const std::map<std::string, std::string>& environment);
std::map<std::string, std::string> process_environment();

// Applies layers in order (later wins). Throws kUsage naming the offending
// key for unknown keys, bad values or an incomplete remote backend.
PipelineConfig resolve_config(const std::vector<ConfigLayer>& layers);

// Stable hash over every setting except secrets.
std::string config_hash(const PipelineConfig& config);
std::string config_to_json(const PipelineConfig& config);

struct StageReport {
  std::string subcommand;
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> drops;
  std::map<std::string, std::string> artifacts;  // path relative to work_dir -> checksum
  std::vector<std::string> warnings;
  std::string output;  // human-readable summary
};

std::string manifest_to_json(const StageReport& report, const PipelineConfig& config);

// Stage drivers over a working directory. Each stage checks that its inputs
// exist (kDependency otherwise), writes its artifacts and a manifest under
// <work_dir>/manifests/<subcommand>.json.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend = nullptr);

  StageReport ingest();
  StageReport templates();
  StageReport synthesize();
  StageReport inject();
  StageReport export_train(FinetuneMode mode);
  StageReport improve(Mode mode, bool baseline_model = false);
  StageReport evaluate(std::string_view task);  // feedback | improvement | preference
  StageReport stats();
  // Blocks until the server stops; on_ready receives the bound port.
  void serve(const std::function<void(int port, AnnotationServer& server)>& on_ready = {});

  const PipelineConfig& config() const { return config_; }
  Gateway& gateway() { return *gateway_; }
  PromptCapture& capture() { return *capture_; }
  DatasetStore& store() { return *store_; }

 private:
  std::vector<Split> stage_splits(bool from_counts) const;
  Split single_split(Split fallback) const;
  std::filesystem::path path(const std::string& name) const { return config_.work_dir / name; }
  void require(const std::filesystem::path& p, std::string_view producer) const;
  void record_artifact(StageReport& report, const std::filesystem::path& p) const;
  StageReport finish(StageReport report) const;
  std::unique_ptr<Gateway> make_gateway(bool baseline_model) const;

  PipelineConfig config_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<PromptCapture> capture_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<DatasetStore> store_;
};

}  // namespace csdial
