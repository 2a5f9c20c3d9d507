#include "csdial/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "csdial/mock_backend.hpp"
#include "csdial/parallel.hpp"
#include "csdial/prompts.hpp"
#include "csdial/remote_backend.hpp"
#include "csdial/text.hpp"
#include "json_codec.hpp"

extern char** environ;

namespace csdial {
namespace {

using codec::Json;

[[noreturn]] void usage(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::kUsage, "config key '" + key + "': " + why);
}

void flatten(const Json& j, const std::string& prefix, ConfigLayer& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else if (j.is_array()) {
    std::vector<std::string> parts;
    for (const auto& v : j) parts.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    out[prefix] = text::join(parts, ",");
  } else {
    out[prefix] = j.dump();
  }
}

std::string bare(const std::string& v) {
  // Flag and env values arrive bare; file values that were JSON strings too.
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    try {
      return Json::parse(v).get<std::string>();
    } catch (const Json::exception&) {
    }
  }
  return v;
}

double as_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    usage(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
  try {
    if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    usage(key, "expected a non-negative integer, got '" + v + "'");
  }
}

bool as_bool(const std::string& key, const std::string& v) {
  auto l = text::to_lower_ascii(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  usage(key, "expected a boolean, got '" + v + "'");
}

std::string checksum_of(const std::filesystem::path& p) { return text::hex64(text::fnv1a64(fs::read_file(p))); }

std::string column_label(Mode mode, bool baseline) {
  std::string m(to_string(mode));
  return baseline ? "baseline-" + m : m;
}

std::string display_label(const std::string& label) {
  static const std::map<std::string, std::string> kNames = {{"baseline-direct", "Baseline-Direct"},
                                                            {"baseline-nlhf", "Baseline-NLHF"},
                                                            {"direct", "Direct"},
                                                            {"multistep", "Multistep"},
                                                            {"nlhf", "NLHF"}};
  auto it = kNames.find(label);
  return it == kNames.end() ? label : it->second;
}

}  // namespace

ConfigLayer read_config_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(fs::read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kUsage, "config file " + path.string() + " is not valid JSON: " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kUsage, e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kUsage, "config file " + path.string() + " must hold a JSON object");
  ConfigLayer out;
  flatten(j, "", out);
  // Relative paths in a config file are relative to the file.
  const auto base = path.parent_path();
  for (const char* key : {"graph", "relations", "work_dir", "cache_dir", "serve.static_dir", "serve.preference_items"}) {
    auto it = out.find(key);
    if (it != out.end() && !it->second.empty() && std::filesystem::path(it->second).is_relative())
      it->second = (base / it->second).lexically_normal().string();
  }
  return out;
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq != std::string_view::npos) env.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return env;
}

ConfigLayer env_layer(const std::map<std::string, std::string>& environment) {
  ConfigLayer out;
  constexpr std::string_view kPrefix = "CSDIAL_";
  for (const auto& [name, value] : environment) {
    if (!name.starts_with(kPrefix)) continue;
    std::string key;
    auto rest = std::string_view(name).substr(kPrefix.size());
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest.substr(i, 2) == "__") {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i])));
      }
    }
    out[key] = value;
  }
  return out;
}

PipelineConfig resolve_config(const std::vector<ConfigLayer>& layers) {
  ConfigLayer merged;
  for (const auto& layer : layers)
    for (const auto& [k, v] : layer) merged[k] = v;

  PipelineConfig c;
  const std::set<std::string> kPurposes = {"naturalize", "negate", "rephrase", "feedback", "improve", "baseline"};
  for (const auto& [key, raw] : merged) {
    const auto v = bare(raw);
    auto opt_path = [&]() -> std::optional<std::filesystem::path> {
      if (v.empty()) return std::nullopt;
      return std::filesystem::path(v);
    };
    if (key == "graph") c.graph = opt_path();
    else if (key == "relations") c.relations = opt_path();
    else if (key == "work_dir") {
      if (v.empty()) usage(key, "must not be empty");
      c.work_dir = v;
    } else if (key == "cache_dir") c.cache_dir = opt_path();
    else if (key == "backend") {
      if (v != "mock" && v != "remote") usage(key, "expected 'mock' or 'remote', got '" + v + "'");
      c.backend = v;
    } else if (key == "endpoint") c.endpoint = v;
    else if (key == "token") c.token = v;
    else if (key == "seed") c.seed = as_uint(key, v);
    else if (key == "generation.temperature") c.sampling.temperature = as_double(key, v);
    else if (key == "generation.max_tokens") c.sampling.max_tokens = static_cast<int>(as_uint(key, v));
    else if (key == "generation.top_p") c.sampling.top_p = as_double(key, v);
    else if (key == "generation.frequency_penalty") c.sampling.frequency_penalty = as_double(key, v);
    else if (key == "generation.presence_penalty") c.sampling.presence_penalty = as_double(key, v);
    else if (key == "generation.naturalize_max_tokens") c.naturalize_max_tokens = static_cast<int>(as_uint(key, v));
    else if (key == "rephrase") c.rephrase = as_bool(key, v);
    else if (key.starts_with("counts.")) {
      auto split = try_parse_split(key.substr(7));
      if (!split) usage(key, "unknown split");
      c.counts[*split] = as_uint(key, v);
    } else if (key == "split") {
      if (v.empty()) {
        c.split.reset();
      } else {
        auto s = try_parse_split(v);
        if (!s) usage(key, "unknown split '" + v + "'");
        c.split = s;
      }
    } else if (key == "workers") {
      c.workers = as_uint(key, v);
      if (c.workers == 0) c.workers = default_workers();
    } else if (key == "max_retries") c.max_retries = static_cast<int>(as_uint(key, v));
    else if (key == "rate_limit") c.rate_limit = as_double(key, v);
    else if (key.starts_with("models.")) {
      auto purpose = key.substr(7);
      if (!kPurposes.count(purpose)) usage(key, "unknown model purpose");
      c.models[purpose] = v;
    } else if (key == "serve.addr") c.serve.addr = v;
    else if (key == "serve.token") c.serve.token = v;
    else if (key == "serve.static_dir") c.serve.static_dir = opt_path();
    else if (key == "serve.preference_items") c.serve.preference_items = opt_path();
    else if (key == "serve.lease_ttl_seconds") c.serve.lease_ttl_seconds = static_cast<int>(as_uint(key, v));
    else if (key == "serve.annotators") {
      c.serve.annotators.clear();
      for (const auto& a : text::split(v, ','))
        if (!text::trim(a).empty()) c.serve.annotators.emplace_back(text::trim(a));
    } else {
      usage(key, "unknown key");
    }
  }
  if (c.backend == "remote") {
    if (c.endpoint.empty()) usage("endpoint", "the remote backend needs an endpoint");
    if (c.token.empty()) usage("token", "the remote backend needs a token");
  }
  if (c.sampling.temperature < 0) usage("generation.temperature", "must be >= 0");
  if (c.sampling.top_p <= 0 || c.sampling.top_p > 1) usage("generation.top_p", "must be in (0, 1]");
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  auto opt = [](const std::optional<std::filesystem::path>& p) { return p ? Json(p->string()) : Json(nullptr); };
  Json counts = Json::object();
  for (const auto& [split, n] : c.counts) counts[std::string(to_string(split))] = n;
  Json j = {{"graph", opt(c.graph)},
            {"relations", opt(c.relations)},
            {"work_dir", c.work_dir.string()},
            {"cache_dir", opt(c.cache_dir)},
            {"backend", c.backend},
            {"endpoint", c.endpoint},
            {"seed", c.seed},
            {"generation",
             {{"temperature", c.sampling.temperature},
              {"max_tokens", c.sampling.max_tokens},
              {"top_p", c.sampling.top_p},
              {"frequency_penalty", c.sampling.frequency_penalty},
              {"presence_penalty", c.sampling.presence_penalty},
              {"naturalize_max_tokens", c.naturalize_max_tokens}}},
            {"rephrase", c.rephrase},
            {"counts", counts},
            {"split", c.split ? Json(std::string(to_string(*c.split))) : Json(nullptr)},
            {"max_retries", c.max_retries},
            {"models", c.models},
            {"prompt_assets", std::string(prompts::kAssetVersion)}};
  return j.dump();
}

std::string config_hash(const PipelineConfig& config) { return text::hex64(text::fnv1a64(config_to_json(config))); }

std::string manifest_to_json(const StageReport& report, const PipelineConfig& config) {
  Json j = {{"subcommand", report.subcommand},
            {"config_hash", config_hash(config)},
            {"seed", config.seed},
            {"backend", config.backend},
            {"config", Json::parse(config_to_json(config))},
            {"counts", report.counts},
            {"drops", report.drops},
            {"artifacts", report.artifacts},
            {"warnings", report.warnings}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)), capture_(std::make_shared<PromptCapture>()) {
  if (!backend_) {
    if (config_.backend == "remote") {
      backend_ = std::make_shared<RemoteBackend>(RemoteBackendConfig{config_.endpoint, config_.token});
    } else {
      backend_ = std::make_shared<MockBackend>(config_.seed);
    }
  }
  gateway_ = make_gateway(false);
  store_ = std::make_unique<DatasetStore>(config_.work_dir);
}

std::unique_ptr<Gateway> Pipeline::make_gateway(bool baseline_model) const {
  GatewayConfig gc;
  gc.sampling = config_.sampling;
  gc.max_tokens_profile[Purpose::kNaturalize] = config_.naturalize_max_tokens;
  gc.cache_dir = config_.cache_dir;
  gc.rate_limit_per_second = config_.rate_limit;
  gc.default_model = config_.backend == "mock" ? "mock" : "default";
  for (const auto& [purpose, ref] : config_.models)
    if (purpose != "baseline") gc.model_refs[parse_purpose(purpose)] = ref;
  if (baseline_model) {
    auto it = config_.models.find("baseline");
    const std::string ref = it != config_.models.end() ? it->second : gc.default_model;
    gc.model_refs[Purpose::kFeedback] = ref;
    gc.model_refs[Purpose::kImprove] = ref;
  }
  auto gw = std::make_unique<Gateway>(backend_, gc);
  gw->set_capture(capture_);
  return gw;
}

std::vector<Split> Pipeline::stage_splits(bool from_counts) const {
  if (config_.split) return {*config_.split};
  std::vector<Split> out;
  for (auto s : kAllSplits) {
    if (from_counts) {
      auto it = config_.counts.find(s);
      if (it != config_.counts.end() && it->second > 0) out.push_back(s);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

Split Pipeline::single_split(Split fallback) const { return config_.split.value_or(fallback); }

void Pipeline::require(const std::filesystem::path& p, std::string_view producer) const {
  if (!std::filesystem::exists(p))
    throw Error(ErrorKind::kDependency,
                p.string() + " does not exist; run `" + std::string(producer) + "` first");
}

void Pipeline::record_artifact(StageReport& report, const std::filesystem::path& p) const {
  report.artifacts[std::filesystem::relative(p, config_.work_dir).generic_string()] = checksum_of(p);
}

StageReport Pipeline::finish(StageReport report) const {
  fs::write_file_atomic(path("manifests") / (report.subcommand + ".json"), manifest_to_json(report, config_));
  return report;
}

StageReport Pipeline::ingest() {
  StageReport report;
  report.subcommand = "ingest";
  if (!config_.graph) throw Error(ErrorKind::kUsage, "config key 'graph': ingest needs a graph file");
  auto registry = RelationRegistry::defaults();
  if (config_.relations) registry.load_file(*config_.relations);
  auto loaded = load_triples(*config_.graph, registry);
  std::filesystem::create_directories(config_.work_dir);
  fs::write_file_atomic(path("graph.tsv"), loaded.graph.serialize());
  fs::write_file_atomic(path("relations.tsv"), registry.serialize());
  record_artifact(report, path("graph.tsv"));
  record_artifact(report, path("relations.tsv"));
  const auto& r = loaded.report;
  report.counts = {{"records", r.records}, {"accepted", r.accepted}, {"heads", loaded.graph.head_count()}};
  report.drops = {{"unknown_relation", r.skipped_unknown_relation},
                  {"empty_field", r.skipped_empty},
                  {"duplicate", r.duplicates}};
  for (const auto& [rel, n] : r.unknown_relations)
    report.warnings.push_back("skipped " + std::to_string(n) + " triples with unknown relation '" + rel + "'");
  report.output = "ingested " + std::to_string(r.accepted) + " of " + std::to_string(r.records) + " triples over " +
                  std::to_string(loaded.graph.head_count()) + " heads\n";
  return finish(std::move(report));
}

StageReport Pipeline::templates() {
  StageReport report;
  report.subcommand = "templates";
  require(path("graph.tsv"), "ingest");
  require(path("relations.tsv"), "ingest");
  RelationRegistry registry;
  registry.load_file(path("relations.tsv"));
  auto loaded = load_triples(path("graph.tsv"), registry);
  for (auto split : stage_splits(true)) {
    const auto target = config_.counts.count(split) ? config_.counts.at(split) : 0;
    CorpusStats stats;
    auto tmpls = build_corpus(loaded.graph, split, target, config_.seed, config_.workers, &stats);
    const auto file = path("templates." + std::string(to_string(split)) + ".jsonl");
    write_templates(file, tmpls);
    record_artifact(report, file);
    report.counts["templates." + std::string(to_string(split))] = tmpls.size();
    if (stats.reduced_turn_counts)
      report.warnings.push_back(std::to_string(stats.reduced_turn_counts) + " " + std::string(to_string(split)) +
                                " templates fell back to a smaller turn count");
    report.output += std::string(to_string(split)) + ": " + std::to_string(tmpls.size()) + " templates\n";
  }
  return finish(std::move(report));
}

StageReport Pipeline::synthesize() {
  StageReport report;
  report.subcommand = "synthesize";
  require(path("relations.tsv"), "ingest");
  RelationRegistry registry;
  registry.load_file(path("relations.tsv"));
  for (auto split : stage_splits(true)) {
    const auto name = std::string(to_string(split));
    const auto in = path("templates." + name + ".jsonl");
    require(in, "templates");
    auto tmpls = read_templates(in);
    std::vector<std::optional<Dialogue>> out(tmpls.size());
    parallel_for(tmpls.size(), config_.workers, [&](std::size_t i) {
      try {
        out[i] = naturalize(tmpls[i], registry, *gateway_, config_.max_retries);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kSynthesisReject) throw;
      }
    });
    std::vector<Dialogue> dialogues;
    for (auto& d : out)
      if (d) dialogues.push_back(std::move(*d));
    const auto file = path("dialogues." + name + ".jsonl");
    write_dialogues(file, dialogues);
    record_artifact(report, file);
    report.counts["dialogues." + name] = dialogues.size();
    report.drops["synthesis_reject." + name] = tmpls.size() - dialogues.size();
    report.output += name + ": " + std::to_string(dialogues.size()) + " dialogues, " +
                     std::to_string(tmpls.size() - dialogues.size()) + " rejected\n";
  }
  return finish(std::move(report));
}

StageReport Pipeline::inject() {
  StageReport report;
  report.subcommand = "inject";
  for (auto split : stage_splits(true)) {
    const auto name = std::string(to_string(split));
    const auto in = path("dialogues." + name + ".jsonl");
    require(in, "synthesize");
    auto dialogues = read_dialogues(in);
    std::map<std::string, int> template_turns;
    if (std::filesystem::exists(path("templates." + name + ".jsonl")))
      for (const auto& t : read_templates(path("templates." + name + ".jsonl"))) template_turns[t.template_id] = t.turn_count;

    for (const auto& existing : store_->load(split))
      if (!existing.feedback.empty())
        throw Error(ErrorKind::kConflict, store_->split_path(split).string() +
                                              " already holds feedback; move it aside before regenerating");

    std::vector<std::optional<CorruptedPair>> pairs(dialogues.size());
    parallel_for(dialogues.size(), config_.workers, [&](std::size_t i) {
      try {
        pairs[i] = inject_error(dialogues[i], *gateway_, config_.max_retries);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInjectionFailure) throw;
      }
    });
    std::string contents;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < dialogues.size(); ++i) {
      if (!pairs[i]) continue;
      auto it = template_turns.find(dialogues[i].template_id);
      auto sample = make_sample(dialogues[i], *pairs[i],
                                it == template_turns.end() ? static_cast<int>(dialogues[i].turns.size()) : it->second);
      if (auto v = check_sample(sample); !v.empty())
        throw Error(ErrorKind::kInvariant, "sample " + sample.sample_id + ": " + v);
      contents += serialize_sample(sample) + "\n";
      ++kept;
    }
    fs::write_file_atomic(store_->split_path(split), contents);
    record_artifact(report, store_->split_path(split));
    report.counts["samples." + name] = kept;
    report.drops["injection_failure." + name] = dialogues.size() - kept;
    report.output += name + ": " + std::to_string(kept) + " samples, " + std::to_string(dialogues.size() - kept) +
                     " injection failures\n";
  }
  store_ = std::make_unique<DatasetStore>(config_.work_dir);
  return finish(std::move(report));
}

StageReport Pipeline::export_train(FinetuneMode mode) {
  StageReport report;
  report.subcommand = "export-train." + std::string(to_string(mode));
  const auto split = single_split(Split::kTrain);
  require(store_->split_path(split), "inject");
  auto result = export_training(store_->load(split), mode);
  report.warnings = result.warnings;
  report.counts["pairs"] = result.pairs.size();
  report.counts["incomplete_samples"] = result.incomplete_samples.size();
  if (!result.pairs.empty()) {
    const auto file = path("finetune") / (std::string(to_string(mode)) + "." + std::string(to_string(split)) + ".jsonl");
    auto summary = export_finetune_file(result.pairs, file);
    record_artifact(report, file);
    report.output = "wrote " + std::to_string(summary.count) + " " + std::string(to_string(mode)) + " pairs to " +
                    file.string() + "\n";
  } else {
    report.output = "no pairs to export\n";
  }
  return finish(std::move(report));
}

StageReport Pipeline::improve(Mode mode, bool baseline_model) {
  const auto label = column_label(mode, baseline_model);
  StageReport report;
  report.subcommand = "improve." + label;
  const auto split = single_split(Split::kTest);
  require(store_->split_path(split), "inject");
  auto samples = store_->load(split);
  if (samples.empty()) throw Error(ErrorKind::kDependency, "split " + std::string(to_string(split)) + " has no samples");

  auto gateway = make_gateway(baseline_model);
  capture_->clear();
  InferenceOptions options{config_.rephrase, config_.workers, config_.max_retries};
  auto run = run_inference(samples, mode, *gateway, options);

  const auto suffix = label + "." + std::string(to_string(split)) + ".jsonl";
  write_inference(path("inference." + suffix), run);
  record_artifact(report, path("inference." + suffix));
  if (config_.rephrase) {
    write_rephrase_log(path("rephrase." + suffix), run.rephrase_log);
    record_artifact(report, path("rephrase." + suffix));
  }
  // Capture order follows worker scheduling; sorted lines keep the file stable.
  std::vector<std::string> prompt_lines;
  for (const auto& e : capture_->entries())
    if (e.purpose == Purpose::kFeedback || e.purpose == Purpose::kImprove)
      prompt_lines.push_back(Json{{"purpose", to_string(e.purpose)}, {"model_ref", e.model_ref}, {"prompt", e.prompt}}.dump());
  std::sort(prompt_lines.begin(), prompt_lines.end());
  std::string prompts_out;
  for (const auto& line : prompt_lines) prompts_out += line + "\n";
  fs::write_file_atomic(path("prompts." + suffix), prompts_out);
  record_artifact(report, path("prompts." + suffix));

  report.counts["cases"] = run.results.size();
  report.counts["no_improvement"] = run.no_improvement;
  const auto captured = capture_->entries();
  auto isolation = audit_mode_isolation(run, samples, captured);
  report.counts["audit.mode_isolation.checked"] = isolation.checked;
  report.counts["audit.mode_isolation.violations"] = isolation.violations.size();
  for (const auto& v : isolation.violations) report.warnings.push_back("mode isolation: " + v);
  if (config_.rephrase) {
    std::vector<FinetunePair> exported;
    if (store_->has_split(Split::kTrain)) {
      auto train = store_->load(Split::kTrain);
      for (auto m : {FinetuneMode::kDirect, FinetuneMode::kFeedback, FinetuneMode::kImproveNlhf,
                     FinetuneMode::kImproveMultistep}) {
        auto pairs = export_training(train, m).pairs;
        exported.insert(exported.end(), pairs.begin(), pairs.end());
      }
    }
    auto placement = audit_rephrase_placement(run.rephrase_log, captured, exported);
    report.counts["audit.rephrase_placement.checked"] = placement.checked;
    report.counts["audit.rephrase_placement.violations"] = placement.violations.size();
    for (const auto& v : placement.violations) report.warnings.push_back("rephrase placement: " + v);
  }
  report.drops["missing_feedback"] = run.skipped.size();
  if (!run.skipped.empty())
    report.warnings.push_back(std::to_string(run.skipped.size()) + " samples have no human feedback and were skipped");
  report.output = label + ": improved " + std::to_string(run.results.size()) + " responses (" +
                  std::to_string(run.no_improvement) + " unchanged)\n";
  return finish(std::move(report));
}

StageReport Pipeline::evaluate(std::string_view task) {
  StageReport report;
  report.subcommand = "evaluate." + std::string(task);
  const auto split = single_split(Split::kTest);
  const auto sname = std::string(to_string(split));
  EvalOptions options;
  options.workers = config_.workers;

  if (task == "preference") {
    require(path("judgments.jsonl"), "serve");
    auto judgments = read_judgments(path("judgments.jsonl"));
    const double a = preference_rate(judgments, SystemLabel::kA);
    const double b = preference_rate(judgments, SystemLabel::kB);
    Json j = {{"judgments", judgments.size()}, {"system_a", a}, {"system_b", b}};
    fs::write_file_atomic(path("preference_eval.json"), j.dump(2) + "\n");
    record_artifact(report, path("preference_eval.json"));
    report.counts["judgments"] = judgments.size();
    char buf[128];
    std::snprintf(buf, sizeof buf, "system_a preferred %.1f%%, system_b %.1f%% over %zu judgments\n", 100 * a,
                  100 * b, judgments.size());
    report.output = buf;
    return finish(std::move(report));
  }

  require(store_->split_path(split), "inject");
  auto samples = store_->load(split);
  EvalRun run;
  run.split = split;
  run.provenance = {{"seed", std::to_string(config_.seed)},
                    {"config_hash", config_hash(config_)},
                    {"backend", config_.backend},
                    {"corpus_checksum", checksum_of(store_->split_path(split))},
                    {"external_scorer", options.external_scorer_name}};

  if (task == "feedback") {
    run.task = EvalTask::kFeedbackGeneration;
    for (bool baseline : {true, false}) {
      auto gateway = make_gateway(baseline);
      Predictions predictions;
      std::vector<std::pair<std::string, std::string>> rows(samples.size());
      parallel_for(samples.size(), config_.workers, [&](std::size_t i) {
        const auto& s = samples[i];
        auto response = s.corrupted.invalid_response;
        if (config_.rephrase) response = rephrase(response, *gateway, config_.max_retries).text;
        rows[i] = {s.sample_id, predict_feedback(s.dialogue.context(), response, *gateway)};
      });
      std::string lines;
      for (auto& [id, text] : rows) {
        lines += Json{{"sample_id", id}, {"f_hat", text}}.dump() + "\n";
        predictions.emplace(id, std::move(text));
      }
      const std::string system = baseline ? "Baseline" : "Fine-tuned";
      const auto pred_file = path("feedback_predictions." + std::string(baseline ? "baseline" : "tuned") + "." + sname + ".jsonl");
      fs::write_file_atomic(pred_file, lines);
      record_artifact(report, pred_file);
      run.provenance["model." + system] = gateway->make_request(Purpose::kFeedback, "x").model_ref;
      run.systems.push_back(evaluate_feedback(system, predictions, samples, split, options));
    }
  } else if (task == "improvement") {
    run.task = EvalTask::kResponseImprovement;
    for (const char* label : {"baseline-direct", "baseline-nlhf", "direct", "multistep", "nlhf"}) {
      const auto file = path(std::string("inference.") + label + "." + sname + ".jsonl");
      if (!std::filesystem::exists(file)) continue;
      Predictions predictions;
      for (auto& r : read_inference(file)) predictions.emplace(r.sample_id, std::move(r.improved));
      run.provenance["inference." + std::string(label)] = checksum_of(file);
      run.systems.push_back(evaluate_improvement(display_label(label), predictions, samples, split, options));
    }
    if (run.systems.empty())
      throw Error(ErrorKind::kDependency, "no inference files for split " + sname + "; run `improve` first");
  } else {
    throw Error(ErrorKind::kUsage, "unknown evaluation task '" + std::string(task) +
                                       "' (expected feedback, improvement or preference)");
  }

  const std::string stem = task == "feedback" ? "feedback_eval." : "improvement_eval.";
  const auto table = render_eval_table(run);
  fs::write_file_atomic(path(stem + sname + ".txt"), table);
  fs::write_file_atomic(path(stem + sname + ".json"), eval_to_json(run) + "\n");
  record_artifact(report, path(stem + sname + ".txt"));
  record_artifact(report, path(stem + sname + ".json"));
  report.counts["systems"] = run.systems.size();
  report.counts["samples"] = run.systems.front().samples;
  report.output = table;
  return finish(std::move(report));
}

StageReport Pipeline::stats() {
  StageReport report;
  report.subcommand = "stats";
  bool any = false;
  for (auto s : kAllSplits) any |= store_->has_split(s);
  if (!any) throw Error(ErrorKind::kDependency, "no corpus files in " + config_.work_dir.string() + "; run `inject` first");
  auto st = compute_stats(*store_);
  fs::write_file_atomic(path("stats.json"), stats_to_json(st) + "\n");
  report.output = render_stats_table(st);
  fs::write_file_atomic(path("stats.txt"), report.output);
  record_artifact(report, path("stats.json"));
  record_artifact(report, path("stats.txt"));
  for (const auto& s : st.splits) {
    report.counts["samples." + std::string(to_string(s.split))] = s.samples;
    report.counts["complete." + std::string(to_string(s.split))] = s.complete;
  }
  return finish(std::move(report));
}

void Pipeline::serve(const std::function<void(int, AnnotationServer&)>& on_ready) {
  const auto split = single_split(Split::kTrain);
  require(store_->split_path(split), "inject");
  std::vector<PreferenceItem> items;
  if (config_.serve.preference_items) items = read_preference_items(*config_.serve.preference_items);

  QueueConfig qc;
  qc.lease_ttl = std::chrono::seconds(config_.serve.lease_ttl_seconds);
  qc.allowed_annotators = {config_.serve.annotators.begin(), config_.serve.annotators.end()};
  qc.seed = config_.seed;
  qc.judgments_path = path("judgments.jsonl");
  AnnotationQueue queue(*store_, split, std::move(items), qc);
  AnnotationServer server(queue, ServerConfig{config_.serve.token, config_.serve.static_dir});

  const auto& addr = config_.serve.addr;
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorKind::kUsage, "config key 'serve.addr': expected host:port");
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::kUsage, "config key 'serve.addr': bad port in '" + addr + "'");
  }
  const int bound = server.bind(addr.substr(0, colon), port);
  std::jthread ready;
  if (on_ready) ready = std::jthread([&] {
      server.wait_until_ready();
      on_ready(bound, server);
    });
  server.serve();
  store_->compact();
}

}  // namespace csdial
