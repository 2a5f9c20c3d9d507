#include "csdial/dataset_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "csdial/text.hpp"
#include "json_codec.hpp"

namespace csdial {

std::string_view to_string(FeedbackSource source) {
  return source == FeedbackSource::kHuman ? "human" : "model";
}

FeedbackSource parse_feedback_source(std::string_view name) {
  if (name == "human") return FeedbackSource::kHuman;
  if (name == "model") return FeedbackSource::kModel;
  throw Error(ErrorKind::kInput, "unknown feedback source '" + std::string(name) + "'");
}

bool Sample::complete() const { return human_feedback_count() == kFeedbackTarget; }

std::size_t Sample::human_feedback_count() const {
  std::size_t n = 0;
  for (const auto& f : feedback) n += f.source == FeedbackSource::kHuman;
  return n;
}

Sample make_sample(const Dialogue& dialogue, const CorruptedPair& corrupted, int template_turns) {
  Sample s;
  s.sample_id = "smp-" + dialogue.dialogue_id;
  s.dialogue = dialogue;
  s.corrupted = corrupted;
  s.split = dialogue.split;
  s.template_turns = template_turns;
  return s;
}

std::string check_sample(const Sample& s) {
  if (s.sample_id.empty()) return "empty sample_id";
  if (auto v = check_dialogue(s.dialogue, static_cast<int>(s.dialogue.turns.size())); !v.empty()) return v;
  if (s.dialogue.turns.size() < static_cast<std::size_t>(kMinTurns)) return "dialogue shorter than 3 turns";
  if (s.template_turns != 0 && s.template_turns != static_cast<int>(s.dialogue.turns.size()))
    return "dialogue turn count differs from its template";
  if (s.dialogue.split != s.split) return "dialogue split differs from sample split";
  if (s.corrupted.dialogue_id != s.dialogue.dialogue_id) return "corrupted pair belongs to another dialogue";
  if (s.corrupted.valid_response != s.dialogue.valid_response()) return "valid response differs from final turn";
  if (same_tokens(s.corrupted.invalid_response, s.corrupted.valid_response))
    return "invalid response equals valid response";
  if (s.corrupted.rephrased_invalid) return "stored samples never carry a rephrased response";
  if (s.human_feedback_count() > kFeedbackTarget) return "more than 2 human feedback records";
  std::set<std::string_view> annotators;
  for (const auto& f : s.feedback) {
    if (f.sample_id != s.sample_id) return "feedback record " + f.record_id + " names another sample";
    if (text::trim(f.text).empty()) return "empty feedback text";
    if (f.source == FeedbackSource::kHuman && !annotators.insert(f.annotator_id).second)
      return "annotator " + f.annotator_id + " gave feedback twice";
  }
  return {};
}

std::string serialize_sample(const Sample& sample) { return codec::to_json(sample).dump(); }

Sample parse_sample(std::string_view line) {
  try {
    return codec::sample_from_json(codec::Json::parse(line));
  } catch (const codec::Json::exception& e) {
    throw Error(ErrorKind::kIngestion, std::string("malformed sample record: ") + e.what());
  }
}

DatasetStore::DatasetStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path DatasetStore::split_path(Split split) const {
  return dir_ / (std::string(to_string(split)) + ".samples");
}

std::filesystem::path DatasetStore::journal_path(Split split) const {
  return dir_ / (std::string(to_string(split)) + ".feedback");
}

bool DatasetStore::has_split(Split split) const { return std::filesystem::exists(split_path(split)); }

void DatasetStore::ensure_loaded() const {
  if (loaded_) return;
  for (auto split : kAllSplits) {
    auto& list = samples_[split];
    if (std::filesystem::exists(split_path(split))) {
      for (const auto& line : text::split_lines(fs::read_file(split_path(split)))) {
        if (text::trim(line).empty()) continue;
        auto s = parse_sample(line);
        index_[s.sample_id] = {split, list.size()};
        list.push_back(std::move(s));
      }
    }
    if (std::filesystem::exists(journal_path(split))) {
      for (const auto& line : text::split_lines(fs::read_file(journal_path(split)))) {
        if (text::trim(line).empty()) continue;
        auto rec = codec::feedback_from_json(codec::Json::parse(line));
        auto it = index_.find(rec.sample_id);
        if (it == index_.end())
          throw Error(ErrorKind::kIngestion, "feedback journal names unknown sample " + rec.sample_id);
        list[it->second.second].feedback.push_back(std::move(rec));
      }
    }
  }
  loaded_ = true;
}

std::string DatasetStore::append(const Sample& sample) {
  if (auto v = check_sample(sample); !v.empty())
    throw Error(ErrorKind::kInvariant, "sample " + sample.sample_id + ": " + v);
  std::lock_guard lock(mu_);
  ensure_loaded();
  if (index_.count(sample.sample_id)) throw Error(ErrorKind::kConflict, "duplicate sample_id " + sample.sample_id);
  std::filesystem::create_directories(dir_);
  {
    std::ofstream out(split_path(sample.split), std::ios::app | std::ios::binary);
    out << serialize_sample(sample) << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "cannot append to " + split_path(sample.split).string());
  }
  auto& list = samples_[sample.split];
  index_[sample.sample_id] = {sample.split, list.size()};
  list.push_back(sample);
  return sample.sample_id;
}

std::vector<Sample> DatasetStore::load(Split split) const {
  std::lock_guard lock(mu_);
  ensure_loaded();
  return samples_[split];
}

std::optional<Sample> DatasetStore::find(std::string_view sample_id) const {
  std::lock_guard lock(mu_);
  ensure_loaded();
  auto it = index_.find(sample_id);
  if (it == index_.end()) return std::nullopt;
  return samples_[it->second.first][it->second.second];
}

std::size_t DatasetStore::size(Split split) const {
  std::lock_guard lock(mu_);
  ensure_loaded();
  return samples_[split].size();
}

void DatasetStore::add_feedback(const FeedbackRecord& record) {
  if (text::trim(record.text).empty()) throw Error(ErrorKind::kValidation, "feedback text is empty");
  std::lock_guard lock(mu_);
  ensure_loaded();
  auto it = index_.find(record.sample_id);
  if (it == index_.end()) throw Error(ErrorKind::kNotFound, "no sample " + record.sample_id);
  auto& sample = samples_[it->second.first][it->second.second];
  for (const auto& f : sample.feedback) {
    if (f.record_id == record.record_id) throw Error(ErrorKind::kConflict, "duplicate record id " + record.record_id);
    if (record.source == FeedbackSource::kHuman && f.source == FeedbackSource::kHuman &&
        f.annotator_id == record.annotator_id)
      throw Error(ErrorKind::kConflict,
                  "annotator " + record.annotator_id + " already gave feedback on " + record.sample_id);
  }
  if (record.source == FeedbackSource::kHuman && sample.human_feedback_count() >= kFeedbackTarget)
    throw Error(ErrorKind::kCardinality, "sample " + record.sample_id + " already has 2 feedback records");
  {
    const auto path = journal_path(sample.split);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << codec::to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "cannot append to " + path.string());
  }
  sample.feedback.push_back(record);
}

void DatasetStore::compact() {
  std::lock_guard lock(mu_);
  ensure_loaded();
  for (auto split : kAllSplits) {
    if (!std::filesystem::exists(journal_path(split))) continue;
    std::string out;
    for (const auto& s : samples_[split]) out += serialize_sample(s) + "\n";
    fs::write_file_atomic(split_path(split), out);
    std::filesystem::remove(journal_path(split));
  }
}

MomentStats turn_moments(std::span<const int> values) {
  MomentStats m;
  const auto n = static_cast<std::int64_t>(values.size());
  if (n == 0) return m;
  std::int64_t sum = 0, sum_sq = 0;
  for (int v : values) {
    sum += v;
    sum_sq += static_cast<std::int64_t>(v) * v;
  }
  m.mean = static_cast<double>(sum) / static_cast<double>(n);
  if (n == 1) {
    m.degenerate = true;
    return m;
  }
  // (n * Σx² - (Σx)²) / (n (n - 1)), numerator exact in integers.
  const auto numer = n * sum_sq - sum * sum;
  m.std = std::sqrt(static_cast<double>(numer) / static_cast<double>(n * (n - 1)));
  return m;
}

SplitStats compute_stats(std::span<const Sample> samples, Split split) {
  SplitStats st;
  st.split = split;
  std::vector<int> tmpl_turns, dlg_turns;
  for (const auto& s : samples) {
    if (s.split != split) continue;
    ++st.samples;
    if (s.complete()) {
      ++st.complete;
    } else {
      ++st.awaiting_feedback;
    }
    dlg_turns.push_back(static_cast<int>(s.dialogue.turns.size()));
    tmpl_turns.push_back(s.template_turns ? s.template_turns : static_cast<int>(s.dialogue.turns.size()));
  }
  st.empty = st.samples == 0;
  st.template_turns = turn_moments(tmpl_turns);
  st.dialogue_turns = turn_moments(dlg_turns);
  return st;
}

DatasetStats compute_stats(const DatasetStore& store) {
  DatasetStats out;
  for (auto split : kAllSplits) {
    auto samples = store.load(split);
    out.splits.push_back(compute_stats(samples, split));
  }
  return out;
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // Column widths count bytes; "±" is two bytes but one glyph.
  std::size_t glyphs = 0;
  for (unsigned char c : s) glyphs += (c & 0xC0) != 0x80;
  if (glyphs < width) s.append(width - glyphs, ' ');
  return s;
}

std::string moment_cell(const SplitStats& st, const MomentStats& m) {
  if (st.empty) return "-";
  auto cell = fixed2(m.mean) + "±" + fixed2(m.std);
  if (m.degenerate) cell += " (n=1)";
  return cell;
}

}  // namespace

std::string render_stats_table(const DatasetStats& stats) {
  constexpr std::size_t kLabel = 26, kCol = 16;
  std::string out = pad("", kLabel);
  for (const auto& st : stats.splits) out += pad(std::string(to_string(st.split)), kCol);
  out += '\n';
  auto row = [&](const std::string& label, auto cell) {
    out += pad(label, kLabel);
    for (const auto& st : stats.splits) out += pad(cell(st), kCol);
    out += '\n';
  };
  row("# Samples", [](const SplitStats& st) { return st.empty ? std::string("empty") : std::to_string(st.samples); });
  row("# Complete samples", [](const SplitStats& st) { return std::to_string(st.complete); });
  row("# Turns per template", [](const SplitStats& st) { return moment_cell(st, st.template_turns); });
  row("# Turns per dialogue", [](const SplitStats& st) { return moment_cell(st, st.dialogue_turns); });
  return out;
}

std::string stats_to_json(const DatasetStats& stats) {
  codec::Json j = codec::Json::object();
  for (const auto& st : stats.splits) {
    auto moments = [](const MomentStats& m) {
      return codec::Json{{"mean", m.mean}, {"std", m.std}, {"degenerate", m.degenerate}};
    };
    j[std::string(to_string(st.split))] = {
        {"empty", st.empty},
        {"samples", st.samples},
        {"complete", st.complete},
        {"awaiting_feedback", st.awaiting_feedback},
        {"turns_per_template", moments(st.template_turns)},
        {"turns_per_dialogue", moments(st.dialogue_turns)},
    };
  }
  return j.dump(2);
}

}  // namespace csdial
