#include "csdial/eval_harness.hpp"

#include <algorithm>
#include <cstdio>

#include "csdial/parallel.hpp"
#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {

std::string_view to_string(EvalTask task) {
  return task == EvalTask::kFeedbackGeneration ? "feedback_generation" : "response_improvement";
}

std::string_view metric_label(Metric metric) {
  switch (metric) {
    case Metric::kRouge1: return "ROUGE1";
    case Metric::kRouge2: return "ROUGE2";
    case Metric::kRougeL: return "ROUGEL";
    case Metric::kBleu: return "BLEU";
    case Metric::kMeteor: return "METEOR";
    case Metric::kSacreBleu: return "SacreBLEU";
    case Metric::kBertScore: return "BERTScore";
  }
  return "?";
}

namespace {

constexpr Metric kSentenceMetrics[] = {Metric::kRouge1, Metric::kRouge2, Metric::kRougeL, Metric::kBleu,
                                       Metric::kMeteor, Metric::kBertScore};

double sentence_score(Metric m, std::string_view cand, std::string_view ref, const EvalOptions& options) {
  switch (m) {
    case Metric::kRouge1: return metrics::rouge_n(cand, ref, 1).f1;
    case Metric::kRouge2: return metrics::rouge_n(cand, ref, 2).f1;
    case Metric::kRougeL: return metrics::rouge_l(cand, ref).f1;
    case Metric::kBleu: return metrics::bleu_sentence(cand, ref);
    case Metric::kMeteor: return metrics::meteor(cand, ref);
    case Metric::kBertScore: return options.external_scorer(cand, ref);
    case Metric::kSacreBleu: break;
  }
  throw Error(ErrorKind::kInput, "not a sentence-level metric");
}

// Summing sorted values keeps the result independent of sample order.
double order_free_mean(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct Case {
  std::string sample_id;
  std::string candidate;
  std::vector<std::string> references;
};

SystemScores score_cases(const std::string& system, std::vector<Case> cases, std::size_t ref_count,
                         const EvalOptions& options) {
  // Canonical order so SacreBLEU inputs and tie-breaks do not depend on input order.
  std::sort(cases.begin(), cases.end(), [](const Case& a, const Case& b) { return a.sample_id < b.sample_id; });
  SystemScores out;
  out.system = system;
  out.samples = cases.size();

  std::vector<std::map<Metric, metrics::MultiRefScore>> per_case(cases.size());
  parallel_for(cases.size(), options.workers, [&](std::size_t i) {
    for (auto m : kSentenceMetrics) {
      auto fn = [&](std::string_view c, std::string_view r) { return sentence_score(m, c, r, options); };
      per_case[i][m] = metrics::multi_ref(fn, cases[i].candidate, cases[i].references);
    }
  });
  for (auto m : kSentenceMetrics) {
    std::vector<double> maxes, mins, avgs;
    for (const auto& pc : per_case) {
      maxes.push_back(pc.at(m).max);
      mins.push_back(pc.at(m).min);
      avgs.push_back(pc.at(m).avg);
    }
    metrics::MultiRefScore cell;
    cell.max = order_free_mean(maxes);
    cell.min = order_free_mean(mins);
    cell.avg = order_free_mean(avgs);
    out.cells[m] = cell;
  }

  std::vector<std::string> candidates;
  for (const auto& c : cases) candidates.push_back(c.candidate);
  std::vector<double> sacre;
  for (std::size_t k = 0; k < ref_count; ++k) {
    std::vector<std::string> refs;
    for (const auto& c : cases) refs.push_back(c.references[k]);
    sacre.push_back(metrics::bleu_corpus(candidates, refs));
  }
  out.cells[Metric::kSacreBleu] = metrics::aggregate(std::move(sacre));
  return out;
}

[[noreturn]] void coverage_error(const std::string& what, const std::vector<std::string>& ids) {
  std::string msg = what + " for " + std::to_string(ids.size()) + " samples:";
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
  if (ids.size() > 20) msg += " ...";
  throw Error(ErrorKind::kCoverage, msg);
}

std::vector<const Sample*> split_samples(std::span<const Sample> samples, Split split) {
  std::vector<const Sample*> out;
  for (const auto& s : samples)
    if (s.split == split) out.push_back(&s);
  if (out.empty()) throw Error(ErrorKind::kCoverage, "split " + std::string(to_string(split)) + " has no samples");
  return out;
}

std::string lookup(const Predictions& predictions, const std::string& id) {
  auto it = predictions.find(id);
  return it == predictions.end() ? std::string() : std::string(text::trim(it->second));
}

void check_foreign(const Predictions& predictions, const std::vector<const Sample*>& samples) {
  std::vector<std::string> foreign;
  for (const auto& [id, text] : predictions) {
    bool known = std::any_of(samples.begin(), samples.end(), [&](const Sample* s) { return s->sample_id == id; });
    if (!known) foreign.push_back(id);
  }
  if (!foreign.empty()) coverage_error("predictions name samples outside the split", foreign);
}

}  // namespace

SystemScores evaluate_feedback(const std::string& system, const Predictions& predictions,
                               std::span<const Sample> samples, Split split, const EvalOptions& options) {
  auto in_split = split_samples(samples, split);
  check_foreign(predictions, in_split);
  std::vector<Case> cases;
  std::vector<std::string> missing, unreferenced;
  for (const auto* s : in_split) {
    Case c{s->sample_id, lookup(predictions, s->sample_id), {}};
    for (const auto& f : s->feedback)
      if (f.source == FeedbackSource::kHuman) c.references.push_back(f.text);
    if (c.candidate.empty()) missing.push_back(s->sample_id);
    if (c.references.size() != kFeedbackTarget) unreferenced.push_back(s->sample_id);
    cases.push_back(std::move(c));
  }
  if (!missing.empty()) coverage_error("missing feedback predictions", missing);
  if (!unreferenced.empty()) coverage_error("fewer than 2 reference feedbacks", unreferenced);
  return score_cases(system, std::move(cases), kFeedbackTarget, options);
}

SystemScores evaluate_improvement(const std::string& system, const Predictions& predictions,
                                  std::span<const Sample> samples, Split split, const EvalOptions& options) {
  auto in_split = split_samples(samples, split);
  check_foreign(predictions, in_split);
  std::vector<Case> cases;
  std::vector<std::string> missing;
  for (const auto* s : in_split) {
    Case c{s->sample_id, lookup(predictions, s->sample_id), {s->corrupted.valid_response}};
    if (c.candidate.empty()) missing.push_back(s->sample_id);
    cases.push_back(std::move(c));
  }
  if (!missing.empty()) coverage_error("missing improved responses", missing);
  return score_cases(system, std::move(cases), 1, options);
}

namespace {

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_eval_table(const EvalRun& run) {
  const bool feedback = run.task == EvalTask::kFeedbackGeneration;
  std::span<const Metric> rows = feedback ? std::span<const Metric>(kFeedbackRows) : std::span<const Metric>(kImprovementRows);
  constexpr std::size_t kLabel = 12, kCol = 18;
  std::string out = "# " + std::string(to_string(run.task)) + " (" + std::string(to_string(run.split)) +
                    "); ROUGE as F1, SacreBLEU on 0-100\n";
  out += pad("", kLabel);
  for (const auto& sys : run.systems) {
    if (feedback) {
      for (const char* agg : {"max", "min", "avg"}) out += pad(sys.system + " " + agg, kCol);
    } else {
      out += pad(sys.system, kCol);
    }
  }
  out += '\n';
  for (auto m : rows) {
    out += pad(std::string(metric_label(m)), kLabel);
    const int decimals = m == Metric::kSacreBleu ? 2 : 3;
    for (const auto& sys : run.systems) {
      const auto& c = sys.cells.at(m);
      if (feedback) {
        for (double v : {c.max, c.min, c.avg}) out += pad(fmt(v, decimals), kCol);
      } else {
        out += pad(fmt(c.avg, decimals), kCol);
      }
    }
    out += '\n';
  }
  return out;
}

std::string eval_to_json(const EvalRun& run) {
  codec::Json j = {{"task", to_string(run.task)}, {"split", to_string(run.split)}};
  codec::Json systems = codec::Json::array();
  for (const auto& sys : run.systems) {
    codec::Json cells = codec::Json::object();
    for (const auto& [m, c] : sys.cells)
      cells[std::string(metric_label(m))] = {{"max", c.max}, {"min", c.min}, {"avg", c.avg}};
    systems.push_back({{"system", sys.system}, {"samples", sys.samples}, {"scores", std::move(cells)}});
  }
  j["systems"] = std::move(systems);
  j["provenance"] = run.provenance;
  return j.dump(2);
}

double relative_improvement(double ours, double baseline) {
  if (!(baseline > 0)) throw Error(ErrorKind::kDomain, "relative improvement needs a positive baseline");
  return (ours - baseline) / baseline;
}

double preference_rate(std::span<const PreferenceJudgment> judgments, SystemLabel system) {
  if (judgments.empty()) throw Error(ErrorKind::kInput, "no preference judgments");
  std::size_t wins = 0;
  for (const auto& j : judgments) wins += j.resolved_winner == system;
  return static_cast<double>(wins) / static_cast<double>(judgments.size());
}

}  // namespace csdial
