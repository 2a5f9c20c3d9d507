#include "csdial/feedback_service.hpp"

#include <httplib.h>

#include <fstream>
#include <thread>

#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::kFeedback ? "feedback" : "preference"; }

TaskKind parse_task_kind(std::string_view name) {
  if (name == "feedback") return TaskKind::kFeedback;
  if (name == "preference") return TaskKind::kPreference;
  throw Error(ErrorKind::kInput, "unknown task kind '" + std::string(name) + "'");
}

std::string_view to_string(SystemLabel s) { return s == SystemLabel::kA ? "system_a" : "system_b"; }
std::string_view to_string(Side s) { return s == Side::kLeft ? "left" : "right"; }

SystemLabel parse_system(std::string_view name) {
  if (name == "system_a" || name == "a") return SystemLabel::kA;
  if (name == "system_b" || name == "b") return SystemLabel::kB;
  throw Error(ErrorKind::kInput, "unknown system '" + std::string(name) + "'");
}

Side parse_side(std::string_view name) {
  if (name == "left") return Side::kLeft;
  if (name == "right") return Side::kRight;
  throw Error(ErrorKind::kInput, "choice must be 'left' or 'right', got '" + std::string(name) + "'");
}

SystemLabel resolve_winner(ShownOrder order, Side choice) { return choice == Side::kLeft ? order.left : order.right; }

namespace {

std::int64_t unix_seconds(std::chrono::system_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

}  // namespace

AnnotationQueue::AnnotationQueue(DatasetStore& store, Split split, std::vector<PreferenceItem> items,
                                 QueueConfig config, Clock clock)
    : store_(store),
      split_(split),
      items_(std::move(items)),
      config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      rng_(derive_seed(config_.seed, "preference-order", 0)) {
  if (config_.judgments_path && std::filesystem::exists(*config_.judgments_path))
    judgments_ = read_judgments(*config_.judgments_path);
}

std::string AnnotationQueue::next_id(std::string_view prefix) {
  return std::string(prefix) + "-" + std::to_string(unix_seconds(clock_())) + "-" + std::to_string(++counter_);
}

void AnnotationQueue::expire_leases() {
  const auto now = clock_();
  for (auto it = active_.begin(); it != active_.end();) {
    if (it->second.lease_expiry <= now) {
      it = active_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<AnnotationTask> AnnotationQueue::lease(TaskKind kind, const std::string& annotator_id) {
  if (text::trim(annotator_id).empty()) throw Error(ErrorKind::kValidation, "annotator_id is required");
  if (!config_.allowed_annotators.empty() && !config_.allowed_annotators.count(annotator_id))
    throw Error(ErrorKind::kValidation, "annotator '" + annotator_id + "' is not registered");
  std::lock_guard lock(mu_);
  expire_leases();

  std::map<std::string, std::size_t> leased;  // subject -> active leases
  std::set<std::string> mine;                 // subjects this annotator holds
  for (const auto& [id, task] : active_) {
    if (task.kind != kind) continue;
    ++leased[task.subject_id];
    if (task.annotator_id == annotator_id) mine.insert(task.subject_id);
  }

  AnnotationTask task;
  task.kind = kind;
  task.annotator_id = annotator_id;
  task.lease_expiry = clock_() + config_.lease_ttl;

  bool found = false;
  if (kind == TaskKind::kFeedback) {
    for (const auto& s : store_.load(split_)) {
      if (mine.count(s.sample_id)) continue;
      if (s.human_feedback_count() + leased[s.sample_id] >= kFeedbackTarget) continue;
      bool answered = false;
      for (const auto& f : s.feedback) answered |= f.source == FeedbackSource::kHuman && f.annotator_id == annotator_id;
      if (answered) continue;
      task.subject_id = s.sample_id;
      task.context = s.dialogue.context();
      task.response = s.corrupted.invalid_response;
      found = true;
      break;
    }
  } else {
    std::map<std::string, std::size_t> judged;
    std::set<std::string> answered;
    for (const auto& j : judgments_) {
      ++judged[j.item_id];
      if (j.annotator_id == annotator_id) answered.insert(j.item_id);
    }
    for (const auto& item : items_) {
      if (mine.count(item.item_id) || answered.count(item.item_id)) continue;
      if (judged[item.item_id] + leased[item.item_id] >= config_.judgments_per_item) continue;
      task.subject_id = item.item_id;
      task.context = item.context;
      task.shown_order = rng_.below(2) == 0 ? ShownOrder{SystemLabel::kA, SystemLabel::kB}
                                            : ShownOrder{SystemLabel::kB, SystemLabel::kA};
      auto text_of = [&](SystemLabel s) { return s == SystemLabel::kA ? item.system_a : item.system_b; };
      task.left = text_of(task.shown_order.left);
      task.right = text_of(task.shown_order.right);
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;
  task.task_id = next_id(kind == TaskKind::kFeedback ? "tf" : "tp");
  active_[task.task_id] = task;
  return task;
}

AnnotationTask& AnnotationQueue::take_task(const std::string& task_id, const std::string& annotator_id,
                                           TaskKind kind) {
  if (retired_.count(task_id)) throw Error(ErrorKind::kConflict, "task " + task_id + " was already submitted");
  auto it = active_.find(task_id);
  if (it == active_.end()) throw Error(ErrorKind::kLease, "task " + task_id + " is not leased (unknown or expired)");
  if (it->second.lease_expiry <= clock_()) {
    active_.erase(it);
    throw Error(ErrorKind::kLease, "lease on task " + task_id + " expired");
  }
  if (it->second.annotator_id != annotator_id)
    throw Error(ErrorKind::kLease, "task " + task_id + " is leased to another annotator");
  if (it->second.kind != kind)
    throw Error(ErrorKind::kValidation, "task " + task_id + " is a " + std::string(to_string(it->second.kind)) + " task");
  return it->second;
}

SubmittedFeedback AnnotationQueue::submit_feedback(const std::string& task_id, const std::string& annotator_id,
                                                   const std::string& text) {
  std::lock_guard lock(mu_);
  auto& task = take_task(task_id, annotator_id, TaskKind::kFeedback);
  const auto cleaned = text::normalize_space(text);
  if (cleaned.empty()) throw Error(ErrorKind::kValidation, "feedback text is empty");
  const auto sentences = text::count_sentences(cleaned);
  if (sentences > config_.max_sentences)
    throw Error(ErrorKind::kValidation, "feedback has " + std::to_string(sentences) + " sentences; at most " +
                                            std::to_string(config_.max_sentences) + " are accepted");
  SubmittedFeedback out;
  if (sentences > config_.warn_sentences)
    out.warnings.push_back("feedback is longer than " + std::to_string(config_.warn_sentences) + " sentences");

  out.record.record_id = next_id("fb");
  out.record.sample_id = task.subject_id;
  out.record.annotator_id = annotator_id;
  out.record.text = cleaned;
  out.record.created_at = unix_seconds(clock_());
  out.record.source = FeedbackSource::kHuman;
  store_.add_feedback(out.record);
  active_.erase(task_id);
  retired_.insert(task_id);
  return out;
}

PreferenceJudgment AnnotationQueue::submit_preference(const std::string& task_id, const std::string& annotator_id,
                                                      Side choice) {
  std::lock_guard lock(mu_);
  auto& task = take_task(task_id, annotator_id, TaskKind::kPreference);
  PreferenceJudgment j;
  j.judgment_id = next_id("pj");
  j.item_id = task.subject_id;
  j.annotator_id = annotator_id;
  j.shown_order = task.shown_order;
  j.choice = choice;
  j.resolved_winner = resolve_winner(task.shown_order, choice);
  j.created_at = unix_seconds(clock_());
  if (config_.judgments_path) {
    std::filesystem::create_directories(config_.judgments_path->parent_path());
    std::ofstream out(*config_.judgments_path, std::ios::app | std::ios::binary);
    out << codec::to_json(j).dump() << '\n';
    if (!out) throw Error(ErrorKind::kIo, "cannot append to " + config_.judgments_path->string());
  }
  judgments_.push_back(j);
  active_.erase(task_id);
  retired_.insert(task_id);
  return j;
}

Progress AnnotationQueue::progress() const {
  std::lock_guard lock(mu_);
  Progress p;
  for (const auto& s : store_.load(split_)) {
    ++p.samples;
    p.complete_samples += s.complete();
    p.feedback_records += s.human_feedback_count();
  }
  p.preference_items = items_.size();
  p.judgments = judgments_.size();
  const auto now = clock_();
  for (const auto& [id, task] : active_) p.active_leases += task.lease_expiry > now;
  return p;
}

std::vector<PreferenceJudgment> AnnotationQueue::judgments() const {
  std::lock_guard lock(mu_);
  return judgments_;
}

std::vector<PreferenceItem> read_preference_items(const std::filesystem::path& path) {
  return codec::read_jsonl<PreferenceItem>(path, codec::preference_item_from_json);
}

std::vector<PreferenceJudgment> read_judgments(const std::filesystem::path& path) {
  return codec::read_jsonl<PreferenceJudgment>(path, codec::judgment_from_json);
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return 422;
    case ErrorKind::kInput: return 400;
    case ErrorKind::kNotFound: return 404;
    case ErrorKind::kLease: return 410;
    case ErrorKind::kConflict:
    case ErrorKind::kCardinality: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const codec::Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.kind()), {{"error", to_string(e.kind())}, {"message", e.what()}});
}

codec::Json task_json(const AnnotationTask& t) {
  codec::Json j = {{"task_id", t.task_id},
                   {"kind", to_string(t.kind)},
                   {"context", codec::to_json(t.context)},
                   {"lease_expiry", unix_seconds(t.lease_expiry)}};
  // Preference payloads carry no source labels.
  if (t.kind == TaskKind::kFeedback) {
    j["sample_id"] = t.subject_id;
    j["response"] = t.response;
  } else {
    j["left"] = t.left;
    j["right"] = t.right;
  }
  return j;
}

codec::Json parse_body(const httplib::Request& req) {
  try {
    auto j = codec::Json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorKind::kInput, "request body must be a JSON object");
    return j;
  } catch (const codec::Json::exception& e) {
    throw Error(ErrorKind::kInput, std::string("request body is not JSON: ") + e.what());
  }
}

std::string string_field(const codec::Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw Error(ErrorKind::kInput, std::string("missing string field '") + key + "'");
  return j.at(key).get<std::string>();
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationQueue& queue;
  ServerConfig config;
  httplib::Server server;

  Impl(AnnotationQueue& q, ServerConfig c) : queue(q), config(std::move(c)) {}

  bool authorized(const httplib::Request& req) const {
    if (config.token.empty()) return true;
    if (req.get_header_value("Authorization") == "Bearer " + config.token) return true;
    return req.get_param_value("token") == config.token;
  }

  template <class Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req)) {
        send_json(res, 401, {{"error", "unauthorized"}, {"message", "missing or wrong token"}});
        return;
      }
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
      }
    };
  }

  void install() {
    server.Get("/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto kind = parse_task_kind(req.has_param("kind") ? req.get_param_value("kind") : "feedback");
      auto task = queue.lease(kind, req.get_param_value("annotator_id"));
      if (!task) {
        res.status = 204;
        return;
      }
      send_json(res, 200, task_json(*task));
    }));
    server.Post(R"(/tasks/([^/]+)/feedback)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      auto out = queue.submit_feedback(req.matches[1], string_field(body, "annotator_id"), string_field(body, "text"));
      auto j = codec::to_json(out.record);
      j["warnings"] = out.warnings;
      send_json(res, 201, j);
    }));
    server.Post(R"(/tasks/([^/]+)/preference)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      auto j = queue.submit_preference(req.matches[1], string_field(body, "annotator_id"),
                                       parse_side(string_field(body, "choice")));
      send_json(res, 201, codec::to_json(j));
    }));
    server.Get("/progress", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto p = queue.progress();
      send_json(res, 200,
                {{"samples", p.samples},
                 {"complete_samples", p.complete_samples},
                 {"feedback_records", p.feedback_records},
                 {"preference_items", p.preference_items},
                 {"judgments", p.judgments},
                 {"active_leases", p.active_leases}});
    }));
    if (config.static_dir) server.set_mount_point("/", config.static_dir->string());
  }
};

AnnotationServer::AnnotationServer(AnnotationQueue& queue, ServerConfig config)
    : impl_(std::make_unique<Impl>(queue, std::move(config))) {
  impl_->install();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace csdial
