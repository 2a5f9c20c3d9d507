#include "csdial/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "csdial/error.hpp"

namespace csdial::metrics {

namespace {

// Decodes one UTF-8 code point at s[i]; advances i. Invalid bytes decode as
// themselves.
char32_t decode(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xe ? 3 : (b0 >> 3) == 0x1e ? 4 : 1;
  if (i + len > s.size()) len = 1;
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1f) : len == 3 ? (b0 & 0x0f) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
  i += len;
  return cp;
}

bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0d) || c == 0x20 || c == 0x85 || c == 0xa0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 || c == 0x202f || c == 0x205f || c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  return c == 0xa1 || c == 0xab || c == 0xbb || c == 0xbf || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205e) || (c >= 0x3001 && c <= 0x3003);
}

struct CodePoint {
  char32_t value;
  std::size_t begin, end;  // byte offsets
};

std::string finish_token(std::string_view text, const std::vector<CodePoint>& cps) {
  std::size_t b = 0, e = cps.size();
  while (b < e && is_punct(cps[b].value)) ++b;
  while (e > b && is_punct(cps[e - 1].value)) --e;
  if (b == e) return {};
  std::string out(text.substr(cps[b].begin, cps[e - 1].end - cps[b].begin));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Tokens& toks, int n) {
  NgramCounts counts;
  if (toks.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t total = 0;
  for (const auto& [gram, count] : cand)
    if (auto it = ref.find(gram); it != ref.end()) total += std::min(count, it->second);
  return total;
}

std::size_t ngram_total(const Tokens& toks, int n) {
  return toks.size() >= static_cast<std::size_t>(n) ? toks.size() - n + 1 : 0;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
  if (cand_len == 0) return 0.0;
  if (cand_len > ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

bool ends_with_double_consonant(std::string_view w) {
  if (w.size() < 2 || w[w.size() - 1] != w[w.size() - 2]) return false;
  char c = w.back();
  return std::string_view("aeiouylsz").find(c) == std::string_view::npos;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  seq.source = std::string(text);
  std::vector<CodePoint> current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t begin = i;
    char32_t cp = decode(text, i);
    if (is_unicode_space(cp)) {
      if (auto tok = finish_token(text, current); !tok.empty()) seq.tokens.push_back(std::move(tok));
      current.clear();
    } else {
      current.push_back({cp, begin, i});
    }
  }
  if (auto tok = finish_token(text, current); !tok.empty()) seq.tokens.push_back(std::move(tok));
  return seq;
}

ScoreTriple make_score(double precision, double recall) {
  double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  return {precision, recall, f1};
}

ScoreTriple rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw Error(ErrorKind::kInput, "rouge_n requires n >= 1");
  auto c = tokenize(candidate).tokens;
  auto r = tokenize(reference).tokens;
  auto cand_total = ngram_total(c, n);
  auto ref_total = ngram_total(r, n);
  if (cand_total == 0 || ref_total == 0) return {};
  auto overlap = static_cast<double>(clipped_overlap(ngrams(c, n), ngrams(r, n)));
  return make_score(overlap / cand_total, overlap / ref_total);
}

ScoreTriple rouge_l(std::string_view candidate, std::string_view reference) {
  auto c = tokenize(candidate).tokens;
  auto r = tokenize(reference).tokens;
  if (c.empty() || r.empty()) return {};
  auto lcs = static_cast<double>(lcs_length(c, r));
  return make_score(lcs / c.size(), lcs / r.size());
}

double bleu_sentence(std::string_view candidate, std::string_view reference, int max_n) {
  auto c = tokenize(candidate).tokens;
  auto r = tokenize(reference).tokens;
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    auto total = ngram_total(c, n);
    auto overlap = total ? clipped_overlap(ngrams(c, n), ngrams(r, n)) : 0;
    if (overlap == 0) return 0.0;
    log_sum += std::log(static_cast<double>(overlap) / static_cast<double>(total));
  }
  return brevity_penalty(c.size(), r.size()) * std::exp(log_sum / max_n);
}

double bleu_corpus(std::span<const std::string> candidates, std::span<const std::string> references, int max_n) {
  if (candidates.size() != references.size())
    throw Error(ErrorKind::kInput, "bleu_corpus: " + std::to_string(candidates.size()) + " candidates vs " +
                                       std::to_string(references.size()) + " references");
  if (candidates.empty()) throw Error(ErrorKind::kInput, "bleu_corpus: empty corpus");
  std::vector<std::size_t> overlap(max_n + 1, 0), total(max_n + 1, 0);
  std::size_t cand_len = 0, ref_len = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    auto c = tokenize(candidates[k]).tokens;
    auto r = tokenize(references[k]).tokens;
    cand_len += c.size();
    ref_len += r.size();
    for (int n = 1; n <= max_n; ++n) {
      total[n] += ngram_total(c, n);
      overlap[n] += clipped_overlap(ngrams(c, n), ngrams(r, n));
    }
  }
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (overlap[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(overlap[n]) / static_cast<double>(total[n]));
  }
  return 100.0 * brevity_penalty(cand_len, ref_len) * std::exp(log_sum / max_n);
}

std::string stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 3) return w;
  if (w.ends_with("sses")) {
    w.resize(w.size() - 2);
  } else if (w.ends_with("ies") && w.size() > 4) {
    w.resize(w.size() - 3);
    w += 'y';
  } else if (w.back() == 's' && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is")) {
    w.pop_back();
  }
  for (std::string_view suffix : {"ing", "ed", "ly"}) {
    if (w.ends_with(suffix) && w.size() - suffix.size() >= 3) {
      w.resize(w.size() - suffix.size());
      if (suffix != "ly" && ends_with_double_consonant(w)) w.pop_back();
      break;
    }
  }
  return w;
}

namespace {

constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

// Exhaustive search over alignments that keep the maximal number of exact
// matches and then of stem matches, maximizing adjacent continuations (so
// minimizing chunks). Options are tried chunk-extension first, which makes
// the first leaf the greedy alignment; the node cap bounds pathological
// inputs such as long runs of one repeated word.
class Aligner {
 public:
  Aligner(const Tokens& c, const Tokens& r, bool use_stemmer) : c_(c), r_(r) {
    for (const auto& w : c) c_keys_.push_back(use_stemmer ? stem(w) : w);
    for (const auto& w : r) r_keys_.push_back(use_stemmer ? stem(w) : w);
    std::map<std::string, std::size_t> cw, rw, cs, rs;
    for (const auto& w : c) ++cw[w];
    for (const auto& w : r) ++rw[w];
    for (const auto& [w, n] : cw)
      if (auto it = rw.find(w); it != rw.end()) exact_target_ += std::min(n, it->second);
    // Leftovers after exact matching, by stem.
    for (const auto& [w, n] : cw) cs[use_stemmer ? stem(w) : w] += n - std::min(n, rw.count(w) ? rw.at(w) : 0);
    for (const auto& [w, n] : rw) rs[use_stemmer ? stem(w) : w] += n - std::min(n, cw.count(w) ? cw.at(w) : 0);
    std::size_t stem_target = 0;
    if (use_stemmer)
      for (const auto& [k, n] : cs)
        if (auto it = rs.find(k); it != rs.end()) stem_target += std::min(n, it->second);
    match_target_ = exact_target_ + stem_target;
    std::size_t matchable = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      matchable += std::find(r_keys_.begin(), r_keys_.end(), c_keys_[i]) != r_keys_.end();
    skip_budget_ = matchable - match_target_;
    map_.assign(c.size(), kUnmatched);
    used_.assign(r.size(), false);
  }

  // Returns the chosen cand->ref mapping.
  std::vector<std::size_t> run() {
    if (match_target_ > 0) dfs(0, 0, 0, 0, skip_budget_);
    return best_.empty() ? std::vector<std::size_t>(c_.size(), kUnmatched) : best_;
  }

 private:
  static constexpr std::size_t kNodeCap = 1'000'000;

  void dfs(std::size_t i, std::size_t cont, std::size_t matched, std::size_t exact, std::size_t skips) {
    if (++nodes_ > kNodeCap && !best_.empty()) return;
    if (i == c_.size()) {
      if (matched == match_target_ && exact == exact_target_ && (best_.empty() || cont > best_cont_)) {
        best_ = map_;
        best_cont_ = cont;
      }
      return;
    }
    if (!best_.empty() && cont + (c_.size() - i) <= best_cont_) return;
    std::vector<std::size_t> options;
    const std::size_t prev = i > 0 ? map_[i - 1] : kUnmatched;
    if (prev != kUnmatched && prev + 1 < r_.size() && !used_[prev + 1] && r_keys_[prev + 1] == c_keys_[i])
      options.push_back(prev + 1);
    bool any = false;
    for (std::size_t j = 0; j < r_.size(); ++j) {
      if (r_keys_[j] != c_keys_[i]) continue;
      any = true;
      if (!used_[j] && (options.empty() || options.front() != j)) options.push_back(j);
    }
    for (auto j : options) {
      const bool is_exact = c_[i] == r_[j];
      if (is_exact ? exact == exact_target_ : matched - exact == match_target_ - exact_target_) continue;
      map_[i] = j;
      used_[j] = true;
      dfs(i + 1, cont + (prev != kUnmatched && j == prev + 1), matched + 1, exact + is_exact, skips);
      used_[j] = false;
      map_[i] = kUnmatched;
    }
    if (!any) {
      dfs(i + 1, cont, matched, exact, skips);
    } else if (skips > 0) {
      dfs(i + 1, cont, matched, exact, skips - 1);
    }
  }

  const Tokens& c_;
  const Tokens& r_;
  Tokens c_keys_, r_keys_;
  std::size_t exact_target_ = 0, match_target_ = 0, skip_budget_ = 0;
  std::vector<std::size_t> map_, best_;
  std::vector<bool> used_;
  std::size_t best_cont_ = 0, nodes_ = 0;
};

}  // namespace

double meteor(std::string_view candidate, std::string_view reference, const MeteorParams& params) {
  auto c = tokenize(candidate).tokens;
  auto r = tokenize(reference).tokens;
  if (c.empty() || r.empty()) return 0.0;

  auto cand_to_ref = Aligner(c, r, params.use_stemmer).run();
  std::size_t matches = 0, chunks = 0;
  std::size_t prev_i = kUnmatched, prev_j = kUnmatched;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (cand_to_ref[i] == kUnmatched) continue;
    ++matches;
    if (prev_i == kUnmatched || prev_i + 1 != i || prev_j + 1 != cand_to_ref[i]) ++chunks;
    prev_i = i;
    prev_j = cand_to_ref[i];
  }
  if (matches == 0) return 0.0;

  const double m = static_cast<double>(matches);
  const double p = m / c.size();
  const double rc = m / r.size();
  const double fmean = p * rc / (params.alpha * p + (1 - params.alpha) * rc);
  const double penalty = params.gamma * std::pow(static_cast<double>(chunks) / m, params.beta);
  return fmean * (1 - penalty);
}

MultiRefScore aggregate(std::vector<double> per_reference) {
  if (per_reference.empty()) throw Error(ErrorKind::kInput, "no reference scores to aggregate");
  MultiRefScore s;
  s.max = *std::max_element(per_reference.begin(), per_reference.end());
  s.min = *std::min_element(per_reference.begin(), per_reference.end());
  s.avg = std::accumulate(per_reference.begin(), per_reference.end(), 0.0) / per_reference.size();
  s.per_reference = std::move(per_reference);
  return s;
}

MultiRefScore multi_ref(const ScoreFn& score_fn, std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw Error(ErrorKind::kInput, "multi_ref requires at least one reference");
  std::vector<double> scores;
  scores.reserve(references.size());
  for (const auto& ref : references) scores.push_back(score_fn(candidate, ref));
  return aggregate(std::move(scores));
}

double mock_external_score(std::string_view candidate, std::string_view reference) {
  auto c = tokenize(candidate).tokens;
  auto r = tokenize(reference).tokens;
  std::set<std::string> cs(c.begin(), c.end()), rs(r.begin(), r.end());
  if (cs.empty() && rs.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& t : cs) shared += rs.count(t);
  return 2.0 * shared / static_cast<double>(cs.size() + rs.size());
}

}  // namespace csdial::metrics
