#!/usr/bin/env python3
"""Reference values for the metric golden file.

Written from the metric definitions alone and deliberately naive: LCS by
subsequence enumeration, METEOR alignment by enumerating every alignment.
Only suitable for the short sentences in the golden set.

    python3 tests/oracles/metric_oracle.py > data/golden/metrics_golden.tsv
"""

import math
import string
import sys
from collections import Counter
from fractions import Fraction
from itertools import combinations

PAIRS = [
    # id, candidate, reference
    ("identity-refuses", "You should think about it before you say no.",
     "You should think about it before you say no."),
    ("identity-short", "the cat sat down", "the cat sat down"),
    ("disjoint", "blue sky today", "green grass yesterday"),
    ("disjoint-punct", "Hello, world!", "goodbye moon"),
    ("unigram-prefix", "the cat", "the cat sat on"),
    ("lcs-swap", "a c b", "a b c"),
    ("brevity", "one two three four", "one two three four five"),
    ("stem-plural", "cats", "cat"),
    ("refuses-flip", "You should think about it before you say yes.",
     "You should think about it before you say no."),
    ("refuses-feedback", "The other person already said no.",
     "The person did not say yes so this response was strange."),
    ("clipping", "the the the the", "the cat on the mat"),
    ("chunk-choice", "a c a b", "a b c"),
    ("stem-verbs", "she walked home quickly", "she is walking home"),
    ("apostrophe", "That's great, isn't it?", "that's GREAT isn't it"),
    ("longer-candidate", "I really want to go to the beach today with you",
     "I want to go to the beach"),
    ("reorder", "no I do not want that", "I do not want that no"),
]

# Corpus BLEU groups over the rows above.
CORPUS_GROUPS = [
    ("all", [p[0] for p in PAIRS]),
    ("single-brevity", ["brevity"]),
    ("identities", ["identity-refuses", "identity-short"]),
    ("refuses", ["refuses-flip", "refuses-feedback", "identity-refuses"]),
    ("mixed", ["unigram-prefix", "clipping", "reorder", "longer-candidate"]),
]


def tokenize(text):
    out = []
    for raw in text.split():
        tok = raw.strip(string.punctuation)
        if tok:
            out.append(tok.lower())
    return out


def ngram_counter(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def prf(overlap, cand_total, ref_total):
    if cand_total == 0 or ref_total == 0:
        return Fraction(0), Fraction(0), Fraction(0)
    p = Fraction(overlap, cand_total)
    r = Fraction(overlap, ref_total)
    f = 2 * p * r / (p + r) if p + r > 0 else Fraction(0)
    return p, r, f


def rouge_n(c, r, n):
    cc, rc = ngram_counter(c, n), ngram_counter(r, n)
    overlap = sum(min(k, rc[g]) for g, k in cc.items())
    return prf(overlap, sum(cc.values()), sum(rc.values()))


def is_subsequence(sub, seq):
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def lcs_brute(a, b):
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for k in range(len(short), 0, -1):
        for idx in combinations(range(len(short)), k):
            if is_subsequence([short[i] for i in idx], long_):
                return k
    return 0


def rouge_l(c, r):
    return prf(lcs_brute(c, r), len(c), len(r))


def brevity(c_len, r_len):
    if c_len == 0:
        return 0.0
    if c_len > r_len:
        return 1.0
    return math.exp(1 - r_len / c_len)


def bleu_from_counts(overlaps, totals, c_len, r_len):
    if any(o == 0 for o in overlaps):
        return 0.0
    logs = [math.log(o / t) for o, t in zip(overlaps, totals)]
    return brevity(c_len, r_len) * math.exp(sum(logs) / len(logs))


def clipped(c, r, n):
    cc, rc = ngram_counter(c, n), ngram_counter(r, n)
    return sum(min(k, rc[g]) for g, k in cc.items()), max(len(c) - n + 1, 0)


def bleu_sentence(c, r):
    stats = [clipped(c, r, n) for n in range(1, 5)]
    return bleu_from_counts([s[0] for s in stats], [s[1] for s in stats], len(c), len(r))


def bleu_corpus(pairs):
    overlaps, totals = [0] * 4, [0] * 4
    c_len = r_len = 0
    for c, r in pairs:
        c_len += len(c)
        r_len += len(r)
        for n in range(1, 5):
            o, t = clipped(c, r, n)
            overlaps[n - 1] += o
            totals[n - 1] += t
    return 100 * bleu_from_counts(overlaps, totals, c_len, r_len)


VOWELS_AND_SOFT = set("aeiouylsz")


def stem(word):
    """Suffix stripper: plural forms first, then one of -ing/-ed/-ly.

    Words of three letters or fewer are left alone. "sses" -> "ss",
    "ies" -> "y" (when more than four letters), a final "s" is dropped
    unless the word ends in "ss", "us" or "is". Then the first of "ing",
    "ed", "ly" that leaves at least three letters is removed; after "ing" or
    "ed", a doubled final consonant (other than l, s, z or a vowel/y) is
    undoubled.
    """
    w = word
    if len(w) <= 3:
        return w
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies") and len(w) > 4:
        w = w[:-3] + "y"
    elif w.endswith("s") and not w.endswith(("ss", "us", "is")):
        w = w[:-1]
    for suffix in ("ing", "ed", "ly"):
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            w = w[: -len(suffix)]
            if suffix != "ly" and len(w) >= 2 and w[-1] == w[-2] and w[-1] not in VOWELS_AND_SOFT:
                w = w[:-1]
            break
    return w


def all_alignments(c, r):
    """Every partial matching between positions whose stems agree."""
    def rec(i, used):
        if i == len(c):
            yield []
            return
        for rest in rec(i + 1, used):
            yield [None] + rest
        for j in range(len(r)):
            if j not in used and stem(c[i]) == stem(r[j]):
                for rest in rec(i + 1, used | {j}):
                    yield [j] + rest
    yield from rec(0, frozenset())


def chunk_count(mapping):
    chunks, prev = 0, None
    for i, j in enumerate(mapping):
        if j is None:
            prev = None
            continue
        if prev is None or j != prev + 1:
            chunks += 1
        prev = j
    return chunks


def meteor(c, r, alpha=0.9, beta=3.0, gamma=0.5):
    if not c or not r:
        return 0.0
    cands = []
    for m in all_alignments(c, r):
        exact = sum(1 for i, j in enumerate(m) if j is not None and c[i] == r[j])
        total = sum(1 for j in m if j is not None)
        cands.append((exact, total, m))
    # Most exact matches, then most matches overall, then fewest chunks.
    best_exact = max(e for e, _, _ in cands)
    pool = [(t, m) for e, t, m in cands if e == best_exact]
    best_total = max(t for t, _ in pool)
    pool = [m for t, m in pool if t == best_total]
    if best_total == 0:
        return 0.0
    chunks = min(chunk_count(m) for m in pool)
    p = best_total / len(c)
    rc = best_total / len(r)
    fmean = p * rc / (alpha * p + (1 - alpha) * rc)
    penalty = gamma * (chunks / best_total) ** beta
    return fmean * (1 - penalty)


def fmt(x):
    return repr(float(x))


def main(out):
    header = ["id", "candidate", "reference",
              "rouge1_p", "rouge1_r", "rouge1_f",
              "rouge2_p", "rouge2_r", "rouge2_f",
              "rougeL_p", "rougeL_r", "rougeL_f",
              "bleu", "meteor"]
    out.write("\t".join(header) + "\n")
    toks = {}
    for pid, cand, ref in PAIRS:
        c, r = tokenize(cand), tokenize(ref)
        toks[pid] = (c, r)
        row = [pid, cand, ref]
        for triple in (rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r)):
            row += [fmt(v) for v in triple]
        row += [fmt(bleu_sentence(c, r)), fmt(meteor(c, r))]
        out.write("\t".join(row) + "\n")
    for name, ids in CORPUS_GROUPS:
        value = bleu_corpus([toks[i] for i in ids])
        out.write("\t".join(["#corpus", name, ",".join(ids), fmt(value)]) + "\n")


if __name__ == "__main__":
    main(sys.stdout)
