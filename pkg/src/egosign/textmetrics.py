"""BLEU-n and ROUGE-L over token sequences.

BLEU uses clipped n-gram precision, the usual brevity penalty and a uniform
geometric mean over orders ``1..n``. A zero match count at order two or
higher is smoothed to ``1 / (candidates + 1)``. ROUGE-L is the LCS F-measure
with ``beta = 1.2``.
"""

from __future__ import annotations

import math
import re

from . import kernels
from .errors import EmptyInput

ROUGE_BETA = 1.2

_TOKEN = re.compile(r"[\[\],]|\.(?!\d)|(?:[^\s\[\],.]|\.(?=\d))+")


def tokenize(text: str) -> list[str]:
    """Split on whitespace; brackets, commas and sentence periods are tokens."""
    return _TOKEN.findall(text)


class Vocabulary:
    """Maps tokens to small ints for the kernels."""

    def __init__(self):
        self.ids: dict[str, int] = {}

    def encode(self, tokens) -> list[int]:
        ids = self.ids
        return [ids.setdefault(t, len(ids)) for t in tokens]


def _encode_pair(pred, ref):
    if not pred or not ref:
        raise EmptyInput("BLEU/ROUGE need non-empty token sequences")
    if pred and isinstance(pred[0], int) and isinstance(ref[0], int):
        return list(pred), list(ref)
    vocab = Vocabulary()
    return vocab.encode(pred), vocab.encode(ref)


def bleu_from_counts(matches, totals, pred_len: int, ref_len: int) -> float:
    """BLEU from per-order ``matches``/``totals`` (index 0 is unigrams)."""
    log_sum = 0.0
    for order, (m, t) in enumerate(zip(matches, totals), start=1):
        if m == 0:
            if order == 1:
                return 0.0
            p = 1.0 / (t + 1)
        else:
            p = m / t
        log_sum += math.log(p)
    bp = 1.0 if pred_len > ref_len else math.exp(1.0 - ref_len / pred_len)
    return bp * math.exp(log_sum / len(matches))


def bleu_n(pred, ref, n: int = 4) -> float:
    if not 1 <= n <= 4:
        raise ValueError("BLEU order must be between 1 and 4")
    p, r = _encode_pair(pred, ref)
    counts = [kernels.ngram_matches(p, r, k) for k in range(1, n + 1)]
    return bleu_from_counts([c[0] for c in counts], [c[1] for c in counts], len(p), len(r))


def rouge_from_lcs(lcs: int, pred_len: int, ref_len: int, beta: float = ROUGE_BETA) -> float:
    if lcs == 0:
        return 0.0
    recall = lcs / ref_len
    precision = lcs / pred_len
    b2 = beta * beta
    return (1 + b2) * recall * precision / (recall + b2 * precision)


def rouge_l(pred, ref, beta: float = ROUGE_BETA) -> float:
    p, r = _encode_pair(pred, ref)
    return rouge_from_lcs(kernels.lcs_length(p, r), len(p), len(r), beta)
