#pragma once

// JSON record forms shared by the file formats and the HTTP API.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csdial/dataset_store.hpp"
#include "csdial/error.hpp"
#include "csdial/feedback_service.hpp"
#include "csdial/template_builder.hpp"
#include "csdial/text.hpp"

namespace csdial::codec {

using Json = nlohmann::ordered_json;

Json to_json(const DialogueTemplate& t);
Json to_json(const std::vector<Turn>& turns);
Json to_json(const Dialogue& d);
Json to_json(const CorruptedPair& p);
Json to_json(const FeedbackRecord& f);
Json to_json(const Sample& s);
Json to_json(const PreferenceItem& item);
Json to_json(const PreferenceJudgment& j);

DialogueTemplate template_from_json(const Json& j);
std::vector<Turn> turns_from_json(const Json& j);
Dialogue dialogue_from_json(const Json& j);
CorruptedPair corrupted_from_json(const Json& j);
FeedbackRecord feedback_from_json(const Json& j);
Sample sample_from_json(const Json& j);
PreferenceItem preference_item_from_json(const Json& j);
PreferenceJudgment judgment_from_json(const Json& j);

// Parses one record per non-blank line; errors carry the line number.
template <class T>
std::vector<T> read_jsonl(const std::filesystem::path& path, const std::function<T(const Json&)>& decode) {
  std::vector<T> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(fs::read_file(path))) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(decode(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kIngestion, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace csdial::codec
