#include "json_codec.hpp"

namespace csdial::codec {

Json to_json(const DialogueTemplate& t) {
  Json lines = Json::array();
  for (const auto& l : t.lines) lines.push_back({{"relation", l.relation}, {"tail", l.tail}});
  return {{"template_id", t.template_id}, {"head", t.head},          {"lines", std::move(lines)},
          {"turn_count", t.turn_count},   {"split", to_string(t.split)}, {"seed_trace", t.seed_trace}};
}

DialogueTemplate template_from_json(const Json& j) {
  DialogueTemplate t;
  t.template_id = j.at("template_id").get<std::string>();
  t.head = j.at("head").get<std::string>();
  for (const auto& l : j.at("lines")) t.lines.push_back({l.at("relation").get<std::string>(), l.at("tail").get<std::string>()});
  t.turn_count = j.at("turn_count").get<int>();
  t.split = parse_split(j.at("split").get<std::string>());
  t.seed_trace = j.value("seed_trace", std::vector<std::uint64_t>{});
  return t;
}

Json to_json(const std::vector<Turn>& turns) {
  Json out = Json::array();
  for (const auto& t : turns) out.push_back({{"speaker", std::string(1, t.speaker)}, {"text", t.text}});
  return out;
}

std::vector<Turn> turns_from_json(const Json& j) {
  std::vector<Turn> out;
  for (const auto& t : j) {
    auto speaker = t.at("speaker").get<std::string>();
    if (speaker != "A" && speaker != "B") throw Error(ErrorKind::kIngestion, "speaker must be A or B");
    out.push_back({speaker[0], t.at("text").get<std::string>()});
  }
  return out;
}

Json to_json(const Dialogue& d) {
  return {{"dialogue_id", d.dialogue_id},
          {"template_id", d.template_id},
          {"turns", to_json(d.turns)},
          {"split", to_string(d.split)}};
}

Dialogue dialogue_from_json(const Json& j) {
  Dialogue d;
  d.dialogue_id = j.at("dialogue_id").get<std::string>();
  d.template_id = j.at("template_id").get<std::string>();
  d.turns = turns_from_json(j.at("turns"));
  d.split = parse_split(j.at("split").get<std::string>());
  return d;
}

Json to_json(const CorruptedPair& p) {
  Json j = {{"dialogue_id", p.dialogue_id},
            {"valid_response", p.valid_response},
            {"invalid_response", p.invalid_response}};
  if (p.rephrased_invalid) j["rephrased_invalid"] = *p.rephrased_invalid;
  return j;
}

CorruptedPair corrupted_from_json(const Json& j) {
  CorruptedPair p;
  p.dialogue_id = j.at("dialogue_id").get<std::string>();
  p.valid_response = j.at("valid_response").get<std::string>();
  p.invalid_response = j.at("invalid_response").get<std::string>();
  if (j.contains("rephrased_invalid")) p.rephrased_invalid = j.at("rephrased_invalid").get<std::string>();
  return p;
}

Json to_json(const FeedbackRecord& f) {
  return {{"record_id", f.record_id},   {"sample_id", f.sample_id},   {"annotator_id", f.annotator_id},
          {"text", f.text},             {"created_at", f.created_at}, {"source", to_string(f.source)}};
}

FeedbackRecord feedback_from_json(const Json& j) {
  FeedbackRecord f;
  f.record_id = j.at("record_id").get<std::string>();
  f.sample_id = j.at("sample_id").get<std::string>();
  f.annotator_id = j.at("annotator_id").get<std::string>();
  f.text = j.at("text").get<std::string>();
  f.created_at = j.at("created_at").get<std::int64_t>();
  f.source = parse_feedback_source(j.at("source").get<std::string>());
  return f;
}

Json to_json(const Sample& s) {
  Json feedback = Json::array();
  for (const auto& f : s.feedback) feedback.push_back(to_json(f));
  return {{"sample_id", s.sample_id},
          {"split", to_string(s.split)},
          {"template_turns", s.template_turns},
          {"dialogue", to_json(s.dialogue)},
          {"corrupted", to_json(s.corrupted)},
          {"feedback", std::move(feedback)}};
}

Sample sample_from_json(const Json& j) {
  Sample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.split = parse_split(j.at("split").get<std::string>());
  s.template_turns = j.value("template_turns", 0);
  s.dialogue = dialogue_from_json(j.at("dialogue"));
  s.corrupted = corrupted_from_json(j.at("corrupted"));
  for (const auto& f : j.at("feedback")) s.feedback.push_back(feedback_from_json(f));
  return s;
}

Json to_json(const PreferenceItem& item) {
  return {{"item_id", item.item_id},
          {"context", to_json(item.context)},
          {"system_a", item.system_a},
          {"system_b", item.system_b}};
}

PreferenceItem preference_item_from_json(const Json& j) {
  PreferenceItem item;
  item.item_id = j.at("item_id").get<std::string>();
  item.context = turns_from_json(j.at("context"));
  item.system_a = j.at("system_a").get<std::string>();
  item.system_b = j.at("system_b").get<std::string>();
  return item;
}

Json to_json(const PreferenceJudgment& j) {
  return {{"judgment_id", j.judgment_id},
          {"item_id", j.item_id},
          {"annotator_id", j.annotator_id},
          {"shown_order", {to_string(j.shown_order.left), to_string(j.shown_order.right)}},
          {"choice", to_string(j.choice)},
          {"resolved_winner", to_string(j.resolved_winner)},
          {"created_at", j.created_at}};
}

PreferenceJudgment judgment_from_json(const Json& j) {
  PreferenceJudgment out;
  out.judgment_id = j.at("judgment_id").get<std::string>();
  out.item_id = j.at("item_id").get<std::string>();
  out.annotator_id = j.at("annotator_id").get<std::string>();
  const auto& order = j.at("shown_order");
  out.shown_order = {parse_system(order.at(0).get<std::string>()), parse_system(order.at(1).get<std::string>())};
  out.choice = parse_side(j.at("choice").get<std::string>());
  out.resolved_winner = parse_system(j.at("resolved_winner").get<std::string>());
  out.created_at = j.at("created_at").get<std::int64_t>();
  return out;
}

}  // namespace csdial::codec
