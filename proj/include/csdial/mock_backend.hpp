#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "csdial/llm_gateway.hpp"

namespace csdial {

// Rule-based stand-in for a completion model. Output is a pure function of
// (seed, request), so whole pipelines run hermetically and reproducibly.
//
//   naturalize  each template line becomes one turn, speakers alternating
//               from A; PersonX lines are realized in A's first person
//   negate      flips the last polarity word (yes/no, want/don't want, ...),
//               otherwise prefixes "It is not true that"
//   rephrase    "Well, " prefix plus contraction normalization
//   feedback    one sentence naming the flipped word and quoting the last
//               context turn
//   improve     flips the baseline's polarity back
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}

  std::string id() const override { return "mock"; }
  std::string generate(const GenerationRequest& request) override;

 private:
  std::uint64_t seed_;
};

namespace mock {

struct PolarityFlip {
  std::string text;      // input with the word replaced
  std::string original;  // word or phrase that was replaced, as written
  std::string flipped;   // its replacement
};

// Flips the last polarity-bearing word of `text`; nullopt if there is none.
std::optional<PolarityFlip> flip_last_polarity(std::string_view text);

std::string negate(std::string_view response, int variant);
std::string rephrase(std::string_view response);
std::string naturalize(std::string_view rendered_template, std::uint64_t seed);
std::string feedback(std::string_view last_context_turn, std::string_view invalid_response);
std::string improve(std::string_view baseline);

}  // namespace mock

}  // namespace csdial
