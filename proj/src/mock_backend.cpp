#include "csdial/mock_backend.hpp"

#include <array>
#include <cctype>
#include <map>
#include <vector>

#include "csdial/prompts.hpp"
#include "csdial/rng.hpp"
#include "csdial/text.hpp"

namespace csdial {

namespace mock {

namespace {

// Every replacement is itself a key, so flipping twice restores the text.
const std::map<std::string, std::string, std::less<>>& polarity_table() {
  static const std::map<std::string, std::string, std::less<>> kTable = [] {
    std::map<std::string, std::string, std::less<>> t;
    const std::pair<const char*, const char*> pairs[] = {
        {"yes", "no"},         {"want", "don't want"}, {"wants", "doesn't want"}, {"great", "awful"},
        {"good", "bad"},       {"love", "hate"},       {"happy", "sad"},          {"glad", "sorry"},
        {"always", "never"},   {"can", "can't"},       {"should", "shouldn't"},   {"will", "won't"},
        {"like", "dislike"},   {"right", "wrong"},     {"agree", "disagree"},     {"easy", "hard"},
        {"excited", "bored"},  {"proud", "ashamed"},   {"better", "worse"},       {"more", "less"},
    };
    for (auto [a, b] : pairs) {
      t.emplace(a, b);
      t.emplace(b, a);
    }
    return t;
  }();
  return kTable;
}

struct Token {
  std::string prefix, core, suffix;
};

Token split_token(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(raw[e - 1]))) --e;
  return {std::string(raw.substr(0, b)), std::string(raw.substr(b, e - b)), std::string(raw.substr(e))};
}

std::string match_case(std::string replacement, std::string_view original) {
  if (!original.empty() && std::isupper(static_cast<unsigned char>(original.front())) && !replacement.empty())
    replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
  return replacement;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(s.front())));
  return s;
}

bool keeps_capital(std::string_view s) {
  // "I", "I'm", "I'll" stay capitalized mid-sentence.
  return s.size() >= 1 && s.front() == 'I' && (s.size() == 1 || s[1] == '\'' || s[1] == ' ');
}

std::string lower_first(std::string s) {
  if (!s.empty() && !keeps_capital(s))
    s.front() = static_cast<char>(std::tolower(static_cast<unsigned char>(s.front())));
  return s;
}

std::string end_sentence(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  if (s.empty() || (s.back() != '!' && s.back() != '?')) s += '.';
  return s;
}

// Perspective substitution: A is PersonX, B is the other participant.
std::string personalize(std::string s, char speaker, bool subject_position) {
  const bool a = speaker == 'A';
  s = text::replace_all(std::move(s), "PersonX's", a ? "my" : "your");
  s = text::replace_all(std::move(s), "PersonY's", a ? "your" : "my");
  s = text::replace_all(std::move(s), "PersonZ's", "someone's");
  s = text::replace_all(std::move(s), "PersonX", a ? (subject_position ? "I" : "me") : "you");
  s = text::replace_all(std::move(s), "PersonY", a ? "you" : (subject_position ? "I" : "me"));
  s = text::replace_all(std::move(s), "PersonZ", "someone");
  return s;
}

std::string first_person_verb(std::string_view verb) {
  std::string v(verb);
  if (v == "is") return "am";
  if (v == "has") return "have";
  if (v == "does") return "do";
  if (v == "goes") return "go";
  auto ends = [&](std::string_view suf) { return v.size() > suf.size() + 1 && v.ends_with(suf); };
  if (ends("ies")) return v.substr(0, v.size() - 3) + "y";
  for (std::string_view suf : {"ches", "shes", "sses", "xes", "zes"})
    if (ends(suf)) return v.substr(0, v.size() - 2);
  if (v.size() > 2 && v.back() == 's' && !v.ends_with("ss") && !v.ends_with("us")) v.pop_back();
  return v;
}

std::string realize_head(std::string_view head) {
  std::string h = personalize(std::string(head), 'A', true);
  if (h.starts_with("I ")) {
    auto rest = h.substr(2);
    auto sp = rest.find(' ');
    auto verb = rest.substr(0, sp);
    h = "I " + first_person_verb(verb) + (sp == std::string::npos ? "" : rest.substr(sp));
  }
  return end_sentence(capitalize(h));
}

struct Phrasing {
  std::string_view surface;
  std::array<std::string_view, 2> first_person;   // spoken by A
  std::array<std::string_view, 2> second_person;  // spoken by B
};

const std::vector<Phrasing>& phrasings() {
  static const std::vector<Phrasing> kPhrasings = {
      {"PersonX is seen as:", {"I guess I'm {}", "People say I'm {}"}, {"You seem {}", "You're so {}"}},
      {"As a result, PersonX feels:", {"I feel {}", "Honestly I feel {}"}, {"You must feel {}", "You seem {}"}},
      {"Before that, PersonX needed:", {"Before that I needed {}", "First I needed {}"},
       {"Before that you needed {}", "You needed {} first"}},
      {"As a result, PersonX wants:", {"Now I want {}", "I really want {}"}, {"Now you want {}", "You want {}"}},
      {"As a result, PersonX will:", {"After that I {}", "Then I {}"}, {"After that you {}", "Then you {}"}},
      {"PersonX wanted:", {"I wanted {}", "All I wanted was {}"}, {"You wanted {}", "I think you wanted {}"}},
      {"As a result, others feel:", {"Everyone else feels {}", "The others feel {}"},
       {"Everyone else feels {}", "The others feel {}"}},
      {"As a result, others want:", {"Everyone else wants {}", "The others want {}"},
       {"Everyone else wants {}", "The others want {}"}},
      {"As a result, others will:", {"Then everyone else {}", "After that everyone else {}"},
       {"Then everyone else {}", "After that everyone else {}"}},
  };
  return kPhrasings;
}

std::string realize_line(std::string_view surface, std::string_view tail, char speaker, int variant) {
  std::string t = personalize(std::string(tail), speaker, false);
  while (!t.empty() && t.back() == '.') t.pop_back();
  if (surface.find("PersonX") != std::string_view::npos) {
    // Tails about PersonX use "their" for PersonX and a third-person verb.
    const char* own = speaker == 'A' ? "my" : "your";
    t = text::replace_all(" " + t + " ", " their ", std::string(" ") + own + " ");
    t = t.substr(1, t.size() - 2);
    if (surface == "As a result, PersonX will:") {
      auto sp = t.find(' ');
      t = first_person_verb(t.substr(0, sp)) + (sp == std::string::npos ? "" : t.substr(sp));
    }
  }
  for (const auto& p : phrasings()) {
    if (p.surface != surface) continue;
    auto pattern = speaker == 'A' ? p.first_person[variant] : p.second_person[variant];
    return end_sentence(text::replace_all(std::string(pattern), "{}", t));
  }
  std::string s(surface);
  if (!s.empty() && s.back() == ':') s.pop_back();
  return end_sentence(capitalize(personalize(s, speaker, true) + " " + t));
}

std::string last_line(std::string_view s) {
  auto lines = text::split_lines(s);
  return lines.empty() ? std::string() : lines.back();
}

std::string require(std::optional<std::string> v, std::string_view what) {
  if (!v || v->empty()) throw Error(ErrorKind::kProtocol, "mock backend: prompt has no " + std::string(what));
  return *v;
}

}  // namespace

std::optional<PolarityFlip> flip_last_polarity(std::string_view input) {
  const auto& table = polarity_table();
  auto raw = text::split(input, ' ');
  std::vector<Token> toks;
  toks.reserve(raw.size());
  for (const auto& r : raw) toks.push_back(split_token(r));

  for (std::size_t i = toks.size(); i-- > 0;) {
    if (toks[i].core.empty()) continue;
    std::string repl, original;
    std::size_t first = i;
    if (i > 0 && toks[i - 1].suffix.empty() && toks[i].prefix.empty() && !toks[i - 1].core.empty()) {
      auto two = text::to_lower_ascii(toks[i - 1].core + " " + toks[i].core);
      if (auto it = table.find(two); it != table.end()) {
        original = toks[i - 1].core + " " + toks[i].core;
        repl = it->second;
        first = i - 1;
      }
    }
    if (original.empty()) {
      auto it = table.find(text::to_lower_ascii(toks[i].core));
      if (it == table.end()) continue;
      original = toks[i].core;
      repl = it->second;
    }
    repl = match_case(repl, original);
    std::vector<std::string> out;
    for (std::size_t k = 0; k < first; ++k) out.push_back(raw[k]);
    out.push_back(toks[first].prefix + repl + toks[i].suffix);
    for (std::size_t k = i + 1; k < raw.size(); ++k) out.push_back(raw[k]);
    return PolarityFlip{text::join(out, " "), original, repl};
  }
  return std::nullopt;
}

std::string negate(std::string_view response, int variant) {
  std::string r(text::trim(response));
  if (variant == 0) {
    if (auto f = flip_last_polarity(r)) return f->text;
  }
  if (variant <= 1) return "It is not true that " + lower_first(r);
  return "Actually, the opposite is true: " + lower_first(r);
}

std::string rephrase(std::string_view response) {
  std::string r(text::trim(response));
  static const std::pair<const char*, const char*> kContractions[] = {
      {"do not", "don't"},   {"does not", "doesn't"}, {"did not", "didn't"}, {"is not", "isn't"},
      {"are not", "aren't"}, {"cannot", "can't"},     {"will not", "won't"}, {"I am", "I'm"},
      {"it is", "it's"},     {"you are", "you're"},   {"that is", "that's"}, {"Do not", "Don't"},
      {"It is", "It's"},     {"You are", "You're"},   {"That is", "That's"},
  };
  for (auto [from, to] : kContractions) r = text::replace_all(std::move(r), from, to);
  return "Well, " + lower_first(r);
}

std::string naturalize(std::string_view rendered_template, std::uint64_t seed) {
  auto lines = text::split_lines(rendered_template);
  std::vector<std::string> turns;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    const char speaker = turns.size() % 2 == 0 ? 'A' : 'B';
    std::string utterance;
    if (turns.empty()) {
      utterance = realize_head(line);
    } else {
      constexpr std::string_view kArrow = "↪";
      if (line.starts_with(kArrow)) line = text::trim(line.substr(kArrow.size()));
      auto colon = line.find(": ");
      std::string_view surface = colon == std::string_view::npos ? std::string_view{} : line.substr(0, colon + 1);
      std::string_view tail = colon == std::string_view::npos ? line : line.substr(colon + 2);
      int variant = static_cast<int>(splitmix64(seed ^ text::fnv1a64(line)) & 1);
      utterance = realize_line(surface, tail, speaker, variant);
    }
    turns.push_back(std::string(1, speaker) + ": " + utterance);
  }
  return text::join(turns, "\n");
}

std::string feedback(std::string_view last_context_turn, std::string_view invalid_response) {
  std::string ctx(text::trim(last_context_turn));
  if (ctx.size() > 3 && ctx[1] == ':') ctx = std::string(text::trim(std::string_view(ctx).substr(2)));
  while (!ctx.empty() && (ctx.back() == '.' || ctx.back() == '!' || ctx.back() == '?')) ctx.pop_back();
  if (auto f = flip_last_polarity(invalid_response))
    return "Saying \"" + text::to_lower_ascii(f->original) + "\" contradicts the earlier turn \"" + ctx +
           "\", so the response should say \"" + text::to_lower_ascii(f->flipped) + "\" instead.";
  return "The response contradicts the earlier turn \"" + ctx + "\" and does not follow from the conversation.";
}

std::string improve(std::string_view baseline) {
  std::string b(text::trim(baseline));
  for (std::string_view prefix : {"It is not true that ", "Actually, the opposite is true: "}) {
    if (b.starts_with(prefix)) return capitalize(b.substr(prefix.size()));
    auto well_prefixed = "Well, " + text::to_lower_ascii(prefix.substr(0, 1)) + std::string(prefix.substr(1));
    if (b.starts_with(well_prefixed)) return capitalize(b.substr(well_prefixed.size()));
  }
  if (auto f = flip_last_polarity(b)) return f->text;
  return "Sorry, I meant the opposite of that.";
}

}  // namespace mock

std::string MockBackend::generate(const GenerationRequest& request) {
  const auto& p = request.prompt;
  switch (request.purpose) {
    case Purpose::kNaturalize: {
      auto start = p.rfind(std::string(prompts::kTemplateLabel) + "\n");
      auto end = p.rfind(std::string("\n") + std::string(prompts::kDialogueLabel));
      if (start == std::string::npos || end == std::string::npos || end < start)
        throw Error(ErrorKind::kProtocol, "mock backend: prompt has no template block");
      start += prompts::kTemplateLabel.size() + 1;
      return mock::naturalize(std::string_view(p).substr(start, end - start),
                              splitmix64(seed_ + static_cast<std::uint64_t>(request.variant)));
    }
    case Purpose::kNegate:
      return mock::negate(mock::require(prompts::last_field(p, prompts::kResponseLabel), "response"),
                          request.variant);
    case Purpose::kRephrase: {
      auto once = mock::rephrase(mock::require(prompts::last_field(p, prompts::kTextLabel), "text"));
      return request.variant == 0 ? once : mock::rephrase(once);
    }
    case Purpose::kFeedback: {
      auto baseline = mock::require(prompts::last_field(p, prompts::kBaselineLabel), "baseline response");
      auto ctx_end = p.rfind(std::string("\n") + std::string(prompts::kBaselineLabel));
      return mock::feedback(mock::last_line(std::string_view(p).substr(0, ctx_end)), baseline);
    }
    case Purpose::kImprove: {
      auto baseline = mock::require(prompts::last_field(p, prompts::kBaselineLabel), "baseline response");
      return std::string(prompts::kImprovedLabel) + " " + mock::improve(baseline);
    }
  }
  throw Error(ErrorKind::kProtocol, "mock backend: unsupported purpose");
}

}  // namespace csdial
