"""Commonsense dialogue corpus toolkit.

Metrics, corpus statistics, training export and the pipeline stages,
backed by the C++ core.
"""

from ._core import (
    CsdialError,
    Pipeline,
    aggregate,
    bleu_corpus,
    bleu_sentence,
    corpus_stats,
    export_training,
    load_samples,
    meteor,
    multi_ref,
    relative_improvement,
    rouge_l,
    rouge_n,
    tokenize,
    turn_count_draws,
    turn_moments,
)

__all__ = [
    "CsdialError",
    "Pipeline",
    "aggregate",
    "bleu_corpus",
    "bleu_sentence",
    "corpus_stats",
    "export_training",
    "load_samples",
    "meteor",
    "multi_ref",
    "relative_improvement",
    "rouge_l",
    "rouge_n",
    "tokenize",
    "turn_count_draws",
    "turn_moments",
]
