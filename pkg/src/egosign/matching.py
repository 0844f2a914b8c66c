"""Permutation-invariant comparison of structured descriptions.

A description with ``M`` clauses whose clause ``j`` lists ``V_j`` keywords
can be written in ``M! * prod(V_j!)`` orders, all of which mean the same
thing. This module counts and enumerates those arrangements, decides
equivalence, and scores a predicted text against the best-matching
arrangement of a reference description.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import kernels
from .errors import BudgetExceeded
from .grammar import StructuredDescription, canonicalize, ensure_valid, join_clauses, render_clause
from .textmetrics import Vocabulary, bleu_from_counts, rouge_from_lcs, tokenize

METRICS = ("exact", "bleu1", "bleu2", "bleu3", "bleu4", "rougeL")


@dataclass(frozen=True)
class ArrangementBudget:
    cap: int = 10**6

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("arrangement budget must be at least 1")


DEFAULT_BUDGET = ArrangementBudget()


@dataclass(frozen=True)
class MatchScore:
    value: float
    arrangement_index: int
    arrangement: str


def arrangement_count(desc: StructuredDescription) -> int:
    count = math.factorial(len(desc.clauses))
    for c in desc.clauses:
        count *= math.factorial(c.keyword_count)
    return count


def _clause_variants(clause) -> list[str]:
    if len(clause.keywords) < 2:
        return [render_clause(clause)]
    return sorted({render_clause(clause, perm) for perm in itertools.permutations(clause.keywords)})


def enumerate_arrangements(desc: StructuredDescription, budget: ArrangementBudget = DEFAULT_BUDGET) -> list[str]:
    """All distinct texts of ``desc`` in lexicographic order."""
    ensure_valid(desc)
    count = arrangement_count(desc)
    if count > budget.cap:
        raise BudgetExceeded(count, budget.cap)
    variants = [_clause_variants(c) for c in desc.clauses]
    texts = set()
    for order in itertools.permutations(range(len(variants))):
        for combo in itertools.product(*(variants[i] for i in order)):
            texts.add(join_clauses(desc.subject, combo))
    return sorted(texts)


def _content(desc: StructuredDescription):
    canon = canonicalize(desc)
    return canon.subject, canon.clauses


def equivalent(a: StructuredDescription, b: StructuredDescription) -> bool:
    """True when ``a`` and ``b`` differ only in clause and keyword order (ids are ignored)."""
    return _content(a) == _content(b)


def best_scores(pred: str, gt: StructuredDescription, metrics=METRICS, budget: ArrangementBudget = DEFAULT_BUDGET):
    """Best score per metric over every arrangement of ``gt``.

    Returns ``{metric: MatchScore}``; ties keep the lexicographically first
    arrangement.
    """
    unknown = set(metrics) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    arrangements = enumerate_arrangements(gt, budget)
    best = {m: MatchScore(-1.0, -1, "") for m in metrics}
    vocab = Vocabulary()
    p = vocab.encode(tokenize(pred))
    orders = max((int(m[-1]) for m in metrics if m.startswith("bleu")), default=0)
    need_rouge = "rougeL" in metrics
    for idx, text in enumerate(arrangements):
        scores = {}
        if "exact" in best:
            scores["exact"] = 1.0 if text == pred else 0.0
        if p and (orders or need_rouge):
            r = vocab.encode(tokenize(text))
            if orders:
                counts = [kernels.ngram_matches(p, r, k) for k in range(1, orders + 1)]
                for k in range(1, orders + 1):
                    name = f"bleu{k}"
                    if name in best:
                        scores[name] = bleu_from_counts(
                            [c[0] for c in counts[:k]], [c[1] for c in counts[:k]], len(p), len(r)
                        )
            if need_rouge:
                scores["rougeL"] = rouge_from_lcs(kernels.lcs_length(p, r), len(p), len(r))
        for m in best:
            value = scores.get(m, 0.0)
            if value > best[m].value:
                best[m] = MatchScore(value, idx, text)
    return best


def best_match(
    pred: str, gt: StructuredDescription, metric: str = "exact", budget: ArrangementBudget = DEFAULT_BUDGET
) -> MatchScore:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    return best_scores(pred, gt, (metric,), budget)[metric]
