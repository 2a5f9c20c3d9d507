#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "csdial/dataset_store.hpp"
#include "csdial/error.hpp"
#include "csdial/synthesizer.hpp"

// Expects `stmt` to throw csdial::Error of the given kind.
#define EXPECT_ERROR_KIND(stmt, expected)                                    \
  do {                                                                       \
    try {                                                                    \
      stmt;                                                                  \
      ADD_FAILURE() << "no error thrown, expected " #expected;               \
    } catch (const ::csdial::Error& error_) {                                \
      EXPECT_EQ(::csdial::to_string(error_.kind()), ::csdial::to_string(expected)) << error_.what(); \
    }                                                                        \
  } while (0)

namespace csdial::testing {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(CSDIAL_DATA_DIR) / rel; }
inline std::filesystem::path fixture(const std::string& name) { return data_path("fixtures/" + name); }

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "csdial-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) std::abort();
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Dialogue make_dialogue(const std::string& id, Split split, const std::vector<std::string>& texts) {
  Dialogue d;
  d.dialogue_id = id;
  d.template_id = "tpl-" + id;
  d.split = split;
  for (std::size_t i = 0; i < texts.size(); ++i) d.turns.push_back({i % 2 == 0 ? 'A' : 'B', texts[i]});
  return d;
}

// Worked example: PersonX refuses PersonY.
inline Dialogue refuses_dialogue(Split split = Split::kTest) {
  return make_dialogue("refuses", split,
                       {"I refuse to do what you ask.", "Why are you being so disagreeable?",
                        "I'm just annoyed and irritated.", "You should think about it before you say no."});
}

inline const char* kRefusesInvalid = "You should think about it before you say yes.";
inline const char* kRefusesFeedback1 = "The other person already said no.";
inline const char* kRefusesFeedback2 = "The person did not say yes so this response was strange.";

inline Sample refuses_sample(Split split = Split::kTest) {
  auto d = refuses_dialogue(split);
  return make_sample(d, {d.dialogue_id, d.valid_response(), kRefusesInvalid, std::nullopt}, 4);
}

inline FeedbackRecord feedback_for(const Sample& s, const std::string& annotator, const std::string& text,
                                   FeedbackSource source = FeedbackSource::kHuman) {
  return {"fb-" + s.sample_id + "-" + annotator, s.sample_id, annotator, text, 1700000000, source};
}

// A synthetic sample with `turns` turns whose final turn flips "yes" to "no".
inline Sample numbered_sample(int index, Split split, int turns, std::size_t feedback_records = 0) {
  std::vector<std::string> texts;
  for (int t = 0; t + 1 < turns; ++t)
    texts.push_back("Turn " + std::to_string(t) + " of dialogue " + std::to_string(index) + ".");
  texts.push_back("I would say yes to plan " + std::to_string(index) + ".");
  auto d = make_dialogue("d" + std::to_string(index), split, texts);
  auto s = make_sample(d, {d.dialogue_id, d.valid_response(), "I would say no to plan " + std::to_string(index) + ".",
                           std::nullopt},
                       turns);
  for (std::size_t k = 0; k < feedback_records; ++k)
    s.feedback.push_back(feedback_for(s, "ann" + std::to_string(k),
                                      "Annotator " + std::to_string(k) + " says the reply contradicts plan " +
                                          std::to_string(index) + "."));
  return s;
}

}  // namespace csdial::testing
