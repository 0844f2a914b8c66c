"""Accuracy reports for plans and description metrics for sign texts."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LengthMismatch
from .matching import DEFAULT_BUDGET, ArrangementBudget, best_scores
from .planner import CATEGORIES, OPTIONS, PlanSet, option

SHORT = {"road": "O_r", "lane": "O_l", "speed": "O_s", "other": "O_o"}
DESCRIPTION_METRICS = ("bleu1", "bleu2", "bleu3", "bleu4", "rougeL", "exact_pi")


def _ratio(correct: int, total: int) -> float | None:
    return correct / total if total else None


@dataclass(frozen=True)
class EvalReport:
    """Plan accuracy.

    ``cells[row][n - 1]`` holds ``(correct, total)`` over samples whose
    ground-truth option in ``row`` is ``#n``. Accuracies are None when no
    sample falls in the denominator.
    """

    cells: dict[str, list[tuple[int, int]]]

    def option_accuracy(self, row: str) -> list[float | None]:
        return [_ratio(c, t) for c, t in self.cells[row]]

    def category(self, row: str) -> float | None:
        return _ratio(sum(c for c, _ in self.cells[row]), sum(t for _, t in self.cells[row]))

    @property
    def O_all(self) -> float | None:
        return _ratio(
            sum(c for row in CATEGORIES for c, _ in self.cells[row]),
            sum(t for row in CATEGORIES for _, t in self.cells[row]),
        )

    @property
    def O_drop1(self) -> float | None:
        return _ratio(
            sum(c for row in CATEGORIES for c, _ in self.cells[row][1:]),
            sum(t for row in CATEGORIES for _, t in self.cells[row][1:]),
        )

    def to_json(self) -> dict:
        out = {
            "per_option": {row: self.option_accuracy(row) for row in CATEGORIES},
            "counts": {row: [{"correct": c, "total": t} for c, t in self.cells[row]] for row in CATEGORIES},
        }
        for row in CATEGORIES:
            out[SHORT[row]] = self.category(row)
        out["O_all"] = self.O_all
        out["O_drop1"] = self.O_drop1
        return out

    def to_table(self) -> str:
        def fmt(v):
            return "  n/a" if v is None else f"{100 * v:5.1f}"

        lines = []
        for row in CATEGORIES:
            cells = "  ".join(f"#{i + 1} {fmt(a)}" for i, a in enumerate(self.option_accuracy(row)))
            lines.append(f"{row:<6} {cells}   {SHORT[row]} {fmt(self.category(row))}")
        lines.append(f"O_all {fmt(self.O_all)}   O_drop#1 {fmt(self.O_drop1)}")
        return "\n".join(lines)


def evaluate_plans(predictions, ground_truth) -> EvalReport:
    """Score predicted plans against ground truth, aligned by position.

    A prediction counts as correct when its option index matches; the text
    carried by a ``[description]`` option is not compared.
    """
    predictions, ground_truth = list(predictions), list(ground_truth)
    if len(predictions) != len(ground_truth):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(ground_truth)} ground-truth plans")
    counts = {row: [[0, 0] for _ in OPTIONS[row]] for row in CATEGORIES}
    for pred, gt in zip(predictions, ground_truth):
        for row in CATEGORIES:
            g = getattr(gt, row).index
            cell = counts[row][g - 1]
            cell[1] += 1
            if getattr(pred, row).index == g:
                cell[0] += 1
    return EvalReport({row: [tuple(c) for c in cells] for row, cells in counts.items()})


def none_plan() -> PlanSet:
    """The constant predictor that answers option #1 everywhere."""
    return PlanSet(*(option(row, "none") for row in CATEGORIES))


@dataclass(frozen=True)
class DescriptionReport:
    per_sample: list[dict[str, float]]

    @property
    def corpus(self) -> dict[str, float | None]:
        n = len(self.per_sample)
        return {m: (sum(s[m] for s in self.per_sample) / n if n else None) for m in DESCRIPTION_METRICS}

    def to_json(self) -> dict:
        return {"corpus": self.corpus, "per_sample": self.per_sample}

    def to_table(self) -> str:
        return "  ".join(
            f"{m} {'n/a' if v is None else f'{100 * v:.1f}'}" for m, v in self.corpus.items()
        )


def evaluate_descriptions(pred_texts, gt_descs, budget: ArrangementBudget = DEFAULT_BUDGET) -> DescriptionReport:
    """BLEU-1..4, ROUGE-L and exact match, each taken at its best arrangement of the reference."""
    pred_texts, gt_descs = list(pred_texts), list(gt_descs)
    if len(pred_texts) != len(gt_descs):
        raise LengthMismatch(f"{len(pred_texts)} predictions for {len(gt_descs)} references")
    rows = []
    for pred, gt in zip(pred_texts, gt_descs):
        best = best_scores(pred, gt, ("exact", "bleu1", "bleu2", "bleu3", "bleu4", "rougeL"), budget)
        row = {m: best[m].value for m in ("bleu1", "bleu2", "bleu3", "bleu4", "rougeL")}
        row["exact_pi"] = best["exact"].value
        rows.append(row)
    return DescriptionReport(rows)
