#include "csdial/llm_gateway.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "csdial/text.hpp"

namespace csdial {

using nlohmann::ordered_json;

std::string_view to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::kNaturalize: return "naturalize";
    case Purpose::kNegate: return "negate";
    case Purpose::kRephrase: return "rephrase";
    case Purpose::kFeedback: return "feedback";
    case Purpose::kImprove: return "improve";
  }
  return "improve";
}

Purpose parse_purpose(std::string_view name) {
  for (auto p : {Purpose::kNaturalize, Purpose::kNegate, Purpose::kRephrase, Purpose::kFeedback, Purpose::kImprove})
    if (to_string(p) == name) return p;
  throw Error(ErrorKind::kInput, "unknown purpose '" + std::string(name) + "'");
}

void PromptCapture::record(Entry entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(entry));
}

std::vector<PromptCapture::Entry> PromptCapture::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<PromptCapture::Entry> PromptCapture::entries(Purpose purpose) const {
  std::lock_guard lock(mu_);
  std::vector<Entry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [&](const Entry& e) { return e.purpose == purpose; });
  return out;
}

void PromptCapture::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

void RateLimiter::acquire() {
  if (per_second_ <= 0) return;
  using namespace std::chrono;
  const auto spacing = duration_cast<steady_clock::duration>(duration<double>(1.0 / per_second_));
  steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    slot = std::max(steady_clock::now(), next_slot_);
    next_slot_ = slot + spacing;
  }
  std::this_thread::sleep_until(slot);
}

std::string canonical_request(const GenerationRequest& r) {
  ordered_json j;
  j["prompt"] = r.prompt;
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  j["top_p"] = r.top_p;
  j["frequency_penalty"] = r.frequency_penalty;
  j["presence_penalty"] = r.presence_penalty;
  j["model_ref"] = r.model_ref;
  j["purpose"] = to_string(r.purpose);
  j["variant"] = r.variant;
  return j.dump();
}

std::string request_key(const GenerationRequest& request) {
  auto canonical = canonical_request(request);
  return text::hex64(text::fnv1a64(canonical)) + text::hex64(text::fnv1a64(canonical, 0x84222325cbf29ce4ULL));
}

namespace {
std::size_t estimate_tokens(std::string_view s) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  // Rough BPE ratio for English text.
  return (words * 4 + 2) / 3;
}
}  // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayConfig config)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      in_flight_(std::clamp<std::ptrdiff_t>(config_.max_in_flight, 1, 1024)) {
  if (!backend_) throw Error(ErrorKind::kPrecondition, "gateway requires a backend");
  if (config_.max_attempts < 1) throw Error(ErrorKind::kPrecondition, "max_attempts must be >= 1");
  if (config_.rate_limit_per_second > 0) limiter_ = std::make_unique<RateLimiter>(config_.rate_limit_per_second);
}

GenerationRequest Gateway::make_request(Purpose purpose, std::string prompt, int variant) const {
  GenerationRequest r;
  r.prompt = std::move(prompt);
  r.purpose = purpose;
  r.variant = variant;
  r.temperature = config_.sampling.temperature;
  r.max_tokens = config_.sampling.max_tokens;
  r.top_p = config_.sampling.top_p;
  r.frequency_penalty = config_.sampling.frequency_penalty;
  r.presence_penalty = config_.sampling.presence_penalty;
  if (auto it = config_.max_tokens_profile.find(purpose); it != config_.max_tokens_profile.end())
    r.max_tokens = it->second;
  auto it = config_.model_refs.find(purpose);
  r.model_ref = it != config_.model_refs.end() ? it->second : config_.default_model;
  return r;
}

std::size_t Gateway::backend_calls() const {
  std::lock_guard lock(stats_mu_);
  return backend_calls_;
}

std::optional<Gateway::CacheEntry> Gateway::cache_lookup(const std::string& key, const std::string& canonical) {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  if (!config_.cache_dir) return std::nullopt;
  auto path = *config_.cache_dir / key.substr(0, 2) / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(in);
    if (j.at("request").get<std::string>() != canonical) return std::nullopt;
    CacheEntry entry{j.at("text").get<std::string>(), j.at("backend_id").get<std::string>()};
    std::lock_guard lock(cache_mu_);
    cache_.emplace(key, entry);
    return entry;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // corrupt cache file: regenerate
  }
}

void Gateway::cache_store(const std::string& key, const std::string& canonical, const CacheEntry& entry) {
  {
    std::lock_guard lock(cache_mu_);
    cache_.insert_or_assign(key, entry);
  }
  if (!config_.cache_dir) return;
  ordered_json j;
  j["request"] = canonical;
  j["text"] = entry.text;
  j["backend_id"] = entry.backend_id;
  fs::write_file_atomic(*config_.cache_dir / key.substr(0, 2) / (key + ".json"), j.dump());
}

GenerationResult Gateway::complete(const GenerationRequest& request) {
  if (text::trim(request.prompt).empty()) throw Error(ErrorKind::kPrecondition, "empty prompt");
  const auto start = std::chrono::steady_clock::now();
  const auto canonical = canonical_request(request);
  const auto key = request_key(request);

  GenerationResult result;
  result.tokens.prompt = estimate_tokens(request.prompt);

  std::optional<CacheEntry> hit;
  if (config_.cache_enabled) hit = cache_lookup(key, canonical);
  if (hit) {
    result.text = hit->text;
    result.backend_id = hit->backend_id;
    result.cached = true;
  } else {
    std::string last_error;
    bool ok = false;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      if (attempt > 0) {
        auto delay = config_.base_backoff * (1LL << std::min(attempt - 1, 20));
        sleeper_(std::min<std::chrono::milliseconds>(delay, config_.max_backoff));
      }
      try {
        in_flight_.acquire();
        struct Release {
          std::counting_semaphore<1024>& s;
          ~Release() { s.release(); }
        } release{in_flight_};
        if (limiter_) limiter_->acquire();
        {
          std::lock_guard lock(stats_mu_);
          ++backend_calls_;
        }
        result.text = backend_->generate(request);
        result.backend_id = backend_->id();
        ok = true;
        break;
      } catch (const TransientError& e) {
        last_error = e.what();
      }
    }
    if (!ok)
      throw Error(ErrorKind::kBackendUnavailable, "retries exhausted after " + std::to_string(config_.max_attempts) +
                                                      " attempts: " + last_error);
    if (text::trim(result.text).empty())
      throw Error(ErrorKind::kProtocol, "backend " + result.backend_id + " returned no text");
    if (config_.cache_enabled) cache_store(key, canonical, {result.text, result.backend_id});
  }
  result.tokens.completion = estimate_tokens(result.text);
  result.latency = std::chrono::steady_clock::now() - start;
  if (capture_) capture_->record({request.purpose, request.model_ref, request.prompt, result.text});
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(FinetuneMode mode) {
  switch (mode) {
    case FinetuneMode::kDirect: return "direct";
    case FinetuneMode::kFeedback: return "feedback";
    case FinetuneMode::kImproveNlhf: return "improve_nlhf";
    case FinetuneMode::kImproveMultistep: return "improve_multistep";
  }
  return "direct";
}

FinetuneMode parse_finetune_mode(std::string_view name) {
  for (auto m : {FinetuneMode::kDirect, FinetuneMode::kFeedback, FinetuneMode::kImproveNlhf,
                 FinetuneMode::kImproveMultistep})
    if (to_string(m) == name) return m;
  throw Error(ErrorKind::kInput, "unknown fine-tune mode '" + std::string(name) + "'");
}

ExportSummary export_finetune_file(const std::vector<FinetunePair>& pairs, const std::filesystem::path& path,
                                   std::string_view stop_sequence) {
  if (pairs.empty()) throw Error(ErrorKind::kPrecondition, "no fine-tune pairs to export");
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (text::trim(p.prompt).empty() || text::trim(p.completion).empty())
      throw Error(ErrorKind::kPrecondition, "fine-tune pair " + std::to_string(i) + " has an empty field");
    if (!stop_sequence.empty() && !p.completion.ends_with(stop_sequence))
      throw Error(ErrorKind::kPrecondition,
                  "fine-tune pair " + std::to_string(i) + " completion lacks the stop sequence");
    ordered_json j;
    j["prompt"] = p.prompt;
    j["completion"] = p.completion;
    out += j.dump();
    out += '\n';
  }
  fs::write_file_atomic(path, out);
  return ExportSummary{pairs.size(), out.size(), text::hex64(text::fnv1a64(out))};
}

std::vector<FinetunePair> read_finetune_file(const std::filesystem::path& path, FinetuneMode mode) {
  std::vector<FinetunePair> pairs;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(fs::read_file(path))) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      pairs.push_back({j.at("prompt").get<std::string>(), j.at("completion").get<std::string>(), mode});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInput, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace csdial
