#include "csdial/improver.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "csdial/parallel.hpp"
#include "csdial/prompts.hpp"
#include "csdial/synthesizer.hpp"
#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kDirect: return "direct";
    case Mode::kMultistep: return "multistep";
    case Mode::kNlhf: return "nlhf";
  }
  return "direct";
}

Mode parse_mode(std::string_view name) {
  if (name == "direct") return Mode::kDirect;
  if (name == "multistep") return Mode::kMultistep;
  if (name == "nlhf") return Mode::kNlhf;
  throw Error(ErrorKind::kUsage, "unknown mode '" + std::string(name) + "' (expected direct, multistep or nlhf)");
}

std::string check_case(const ImprovementCase& c) {
  if (text::trim(c.baseline).empty()) return "empty baseline response";
  switch (c.mode) {
    case Mode::kDirect:
      if (c.human_feedback || c.predicted_feedback) return "direct mode takes no feedback";
      break;
    case Mode::kNlhf:
      if (!c.human_feedback || text::trim(*c.human_feedback).empty()) return "nlhf mode needs human feedback";
      if (c.predicted_feedback) return "nlhf mode takes no predicted feedback";
      break;
    case Mode::kMultistep:
      if (!c.predicted_feedback || text::trim(*c.predicted_feedback).empty())
        return "multistep mode needs predicted feedback";
      if (c.human_feedback) return "multistep mode takes no human feedback";
      break;
  }
  return {};
}

std::string predict_feedback(const std::vector<Turn>& context, const std::string& invalid_response,
                             Gateway& gateway) {
  if (text::trim(invalid_response).empty())
    throw Error(ErrorKind::kPrecondition, "cannot predict feedback for an empty response");
  auto prompt = prompts::feedback_prompt(render_context(context), invalid_response);
  auto result = gateway.complete(gateway.make_request(Purpose::kFeedback, std::move(prompt)));
  auto text = text::normalize_space(prompts::strip_label(result.text, "Feedback:"));
  if (text.empty()) throw Error(ErrorKind::kProtocol, "feedback model returned an empty critique");
  return text;
}

ImprovementResult improve(const ImprovementCase& c, Gateway& gateway, int max_retries) {
  if (auto v = check_case(c); !v.empty()) throw Error(ErrorKind::kPrecondition, "case " + c.sample_id + ": " + v);
  std::optional<std::string_view> feedback;
  if (c.mode == Mode::kNlhf) feedback = *c.human_feedback;
  if (c.mode == Mode::kMultistep) feedback = *c.predicted_feedback;
  const auto prompt = prompts::improve_prompt(render_context(c.context), c.baseline, feedback);

  ImprovementResult r;
  r.sample_id = c.sample_id;
  r.mode = c.mode;
  r.baseline = c.baseline;
  if (feedback) r.feedback = std::string(*feedback);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto out = gateway.complete(gateway.make_request(Purpose::kImprove, prompt, attempt));
    r.improved = text::normalize_space(prompts::strip_label(out.text, prompts::kImprovedLabel));
    if (!r.improved.empty() && !same_tokens(r.improved, c.baseline)) return r;
  }
  r.no_improvement = true;
  return r;
}

InferenceRun run_inference(const std::vector<Sample>& samples, Mode mode, Gateway& gateway,
                           const InferenceOptions& options) {
  InferenceRun run;
  run.mode = mode;

  std::vector<const Sample*> eligible;
  for (const auto& s : samples) {
    if (mode == Mode::kNlhf && s.human_feedback_count() == 0) {
      run.skipped.push_back(s.sample_id);
      continue;
    }
    eligible.push_back(&s);
  }

  std::vector<ImprovementResult> results(eligible.size());
  std::vector<std::optional<RephraseLogEntry>> log(eligible.size());
  parallel_for(eligible.size(), options.workers, [&](std::size_t i) {
    const auto& s = *eligible[i];
    ImprovementCase c;
    c.sample_id = s.sample_id;
    c.context = s.dialogue.context();
    c.mode = mode;
    c.baseline = s.corrupted.invalid_response;
    bool rephrased = false;
    if (options.rephrase) {
      auto rp = rephrase(s.corrupted.invalid_response, gateway, options.max_retries);
      log[i] = RephraseLogEntry{s.sample_id, s.corrupted.invalid_response, rp.text, rp.fell_back};
      c.baseline = rp.text;
      rephrased = !rp.fell_back;
    }
    if (mode == Mode::kNlhf) {
      const FeedbackRecord* first = nullptr;
      for (const auto& f : s.feedback)
        if (f.source == FeedbackSource::kHuman && (!first || f.created_at < first->created_at)) first = &f;
      c.human_feedback = first->text;
    } else if (mode == Mode::kMultistep) {
      c.predicted_feedback = predict_feedback(c.context, c.baseline, gateway);
    }
    results[i] = improve(c, gateway, options.max_retries);
    results[i].rephrased = rephrased;
  });

  run.results = std::move(results);
  for (auto& entry : log)
    if (entry) run.rephrase_log.push_back(std::move(*entry));
  run.no_improvement = static_cast<std::size_t>(
      std::count_if(run.results.begin(), run.results.end(), [](const auto& r) { return r.no_improvement; }));
  return run;
}

void write_inference(const std::filesystem::path& path, const InferenceRun& run) {
  std::string out;
  for (const auto& r : run.results) {
    codec::Json j = {{"sample_id", r.sample_id}, {"mode", to_string(r.mode)}, {"r_b", r.baseline}};
    if (r.feedback) j[r.mode == Mode::kNlhf ? "f_star" : "f_hat"] = *r.feedback;
    j["r_star"] = r.improved;
    j["no_improvement"] = r.no_improvement;
    j["rephrased"] = r.rephrased;
    out += j.dump() + "\n";
  }
  fs::write_file_atomic(path, out);
}

std::vector<ImprovementResult> read_inference(const std::filesystem::path& path) {
  return codec::read_jsonl<ImprovementResult>(path, [](const codec::Json& j) {
    ImprovementResult r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.baseline = j.at("r_b").get<std::string>();
    if (j.contains("f_star")) r.feedback = j.at("f_star").get<std::string>();
    if (j.contains("f_hat")) r.feedback = j.at("f_hat").get<std::string>();
    r.improved = j.at("r_star").get<std::string>();
    r.no_improvement = j.value("no_improvement", false);
    r.rephrased = j.value("rephrased", false);
    return r;
  });
}

void write_rephrase_log(const std::filesystem::path& path, const std::vector<RephraseLogEntry>& log) {
  std::string out;
  for (const auto& e : log)
    out += codec::Json{{"sample_id", e.sample_id},
                       {"original", e.original},
                       {"rephrased", e.rephrased},
                       {"fell_back", e.fell_back}}
               .dump() +
           "\n";
  fs::write_file_atomic(path, out);
}

std::vector<RephraseLogEntry> read_rephrase_log(const std::filesystem::path& path) {
  return codec::read_jsonl<RephraseLogEntry>(path, [](const codec::Json& j) {
    return RephraseLogEntry{j.at("sample_id").get<std::string>(), j.at("original").get<std::string>(),
                            j.at("rephrased").get<std::string>(), j.value("fell_back", false)};
  });
}

namespace {

std::string completion(std::string_view target) { return " " + text::normalize_space(target) + "\n"; }

}  // namespace

TrainingExport export_training(const std::vector<Sample>& samples, FinetuneMode mode) {
  TrainingExport out;
  if (samples.empty()) {
    out.warnings.push_back("split has no samples; export is empty");
    return out;
  }
  for (const auto& s : samples) {
    const auto context = render_context(s.dialogue.context());
    const auto& invalid = s.corrupted.invalid_response;
    const auto& valid = s.corrupted.valid_response;
    if (!s.complete()) out.incomplete_samples.push_back(s.sample_id);
    if (mode == FinetuneMode::kDirect) {
      out.pairs.push_back({prompts::improve_prompt(context, invalid, std::nullopt), completion(valid), mode});
      continue;
    }
    for (const auto& f : s.feedback) {
      if (f.source != FeedbackSource::kHuman) continue;
      if (mode == FinetuneMode::kFeedback) {
        out.pairs.push_back({prompts::feedback_prompt(context, invalid), completion(f.text), mode});
      } else {
        out.pairs.push_back({prompts::improve_prompt(context, invalid, f.text), completion(valid), mode});
      }
    }
  }
  if (!out.incomplete_samples.empty())
    out.warnings.push_back(std::to_string(out.incomplete_samples.size()) + " samples have fewer than 2 feedback records");
  return out;
}

namespace {

// The context and baseline block shared by feedback and improve prompts.
std::string prompt_anchor(const std::vector<Turn>& context, std::string_view baseline) {
  std::string out(prompts::kContextLabel);
  out += '\n';
  out += render_context(context);
  out += '\n';
  out += prompts::kBaselineLabel;
  out += text::normalize_space(baseline);
  return out;
}

bool anchored(const std::string& prompt, const std::string& anchor) {
  auto pos = prompt.find(anchor);
  if (pos == std::string::npos) return false;
  auto end = pos + anchor.size();
  return end == prompt.size() || prompt[end] == '\n';
}

}  // namespace

AuditReport audit_mode_isolation(const InferenceRun& run, const std::vector<Sample>& samples,
                                 const std::vector<PromptCapture::Entry>& captured) {
  AuditReport report;
  std::map<std::string, const Sample*, std::less<>> by_id;
  for (const auto& s : samples) by_id[s.sample_id] = &s;
  auto fail = [&](const std::string& id, const std::string& what) { report.violations.push_back(id + ": " + what); };

  for (const auto& r : run.results) {
    auto it = by_id.find(r.sample_id);
    if (it == by_id.end()) {
      fail(r.sample_id, "result for an unknown sample");
      continue;
    }
    const Sample& s = *it->second;
    const auto anchor = prompt_anchor(s.dialogue.context(), r.baseline);

    std::vector<std::string> human;
    const FeedbackRecord* earliest = nullptr;
    for (const auto& f : s.feedback) {
      if (f.source != FeedbackSource::kHuman) continue;
      human.push_back(text::normalize_space(f.text));
      if (!earliest || f.created_at < earliest->created_at) earliest = &f;
    }
    std::optional<std::string> predicted;
    for (const auto& e : captured)
      if (e.purpose == Purpose::kFeedback && anchored(e.prompt, anchor))
        predicted = text::normalize_space(prompts::strip_label(e.output, "Feedback:"));

    std::size_t seen = 0;
    for (const auto& e : captured) {
      if (e.purpose != Purpose::kImprove || !anchored(e.prompt, anchor)) continue;
      ++seen;
      ++report.checked;
      auto shown = prompts::last_field(e.prompt, prompts::kFeedbackLabel);
      std::optional<std::string> licensed;
      if (run.mode == Mode::kNlhf && earliest) licensed = text::normalize_space(earliest->text);
      if (run.mode == Mode::kMultistep) licensed = predicted;

      if (run.mode == Mode::kDirect) {
        if (shown) fail(s.sample_id, "direct prompt carries a feedback field");
      } else if (!licensed) {
        fail(s.sample_id, "no licensed feedback available for the prompt");
      } else if (!shown || text::normalize_space(*shown) != *licensed) {
        fail(s.sample_id, std::string(to_string(run.mode)) + " prompt feedback differs from the licensed text");
      }
      for (const auto& h : human)
        if ((!licensed || h != *licensed) && e.prompt.find(h) != std::string::npos)
          fail(s.sample_id, "prompt contains unlicensed human feedback");
      if (run.mode != Mode::kMultistep && predicted && e.prompt.find(*predicted) != std::string::npos)
        fail(s.sample_id, "prompt contains predicted feedback");
    }
    if (seen == 0) fail(s.sample_id, "no captured improve prompt");
  }
  return report;
}

AuditReport audit_rephrase_placement(const std::vector<RephraseLogEntry>& log,
                                     const std::vector<PromptCapture::Entry>& captured,
                                     const std::vector<FinetunePair>& exported) {
  AuditReport report;
  std::set<std::string> shown, rephrased;
  for (const auto& e : log) {
    shown.insert(text::normalize_space(e.rephrased));
    if (!e.fell_back && !same_tokens(e.rephrased, e.original)) rephrased.insert(text::normalize_space(e.rephrased));
  }
  for (const auto& e : captured) {
    if (e.purpose != Purpose::kImprove && e.purpose != Purpose::kFeedback) continue;
    ++report.checked;
    auto baseline = prompts::last_field(e.prompt, prompts::kBaselineLabel);
    if (!baseline) {
      report.violations.push_back("inference prompt without a baseline field");
    } else if (!shown.count(text::normalize_space(*baseline))) {
      report.violations.push_back("inference prompt baseline is not a rephrasing: " + *baseline);
    }
  }
  for (std::size_t i = 0; i < exported.size(); ++i) {
    ++report.checked;
    for (const auto& r : rephrased) {
      if (exported[i].prompt.find(r) != std::string::npos || exported[i].completion.find(r) != std::string::npos) {
        report.violations.push_back("training pair " + std::to_string(i) + " contains rephrased text: " + r);
        break;
      }
    }
  }
  return report;
}

}  // namespace csdial
