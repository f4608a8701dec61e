"""Per-class precision/recall/F-measure, corpus label statistics, and
decision-threshold sweeps.

The headline metric is the mean of the F-measures for the good and bad
classes.  A class with zero precision+recall contributes F = 0 rather than
NaN, so degenerate predictions still evaluate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .types import Label, ValidationError


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f: float


@dataclass(frozen=True)
class EvalReport:
    good: ClassMetrics
    bad: ClassMetrics
    mean_f: float
    # confusion counts keyed (gold, predicted)
    n_gg: int
    n_gb: int
    n_bg: int
    n_bb: int

    @property
    def n_tokens(self) -> int:
        return self.n_gg + self.n_gb + self.n_bg + self.n_bb

    def as_dict(self) -> dict:
        return {
            "good": vars(self.good),
            "bad": vars(self.bad),
            "mean_f": self.mean_f,
            "confusion": {"gg": self.n_gg, "gb": self.n_gb, "bg": self.n_bg, "bb": self.n_bb},
            "n_tokens": self.n_tokens,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _prf(tp: int, n_pred: int, n_gold: int) -> ClassMetrics:
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassMetrics(precision, recall, f)


def evaluate(pred: Sequence[Label], gold: Sequence[Label]) -> EvalReport:
    if len(pred) != len(gold):
        raise ValidationError(f"{len(pred)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValidationError("cannot evaluate zero tokens")
    n_gg = n_gb = n_bg = n_bb = 0
    for p, g in zip(pred, gold):
        if g is Label.G:
            if p is Label.G:
                n_gg += 1
            else:
                n_gb += 1
        else:
            if p is Label.G:
                n_bg += 1
            else:
                n_bb += 1
    good = _prf(n_gg, n_gg + n_bg, n_gg + n_gb)
    bad = _prf(n_bb, n_bb + n_gb, n_bb + n_bg)
    return EvalReport(good, bad, (good.f + bad.f) / 2.0, n_gg, n_gb, n_bg, n_bb)


def labels_from_threshold(p_good: Sequence[float], threshold: float) -> list[Label]:
    """Decision rule: bad whenever p_bad >= threshold (ties go to bad)."""
    return [Label.B if (1.0 - p) >= threshold else Label.G for p in p_good]


def sweep(
    p_good: Sequence[float],
    gold: Sequence[Label],
    grid: Sequence[float],
) -> list[tuple[float, EvalReport]]:
    """Evaluate the threshold decision rule at every grid point."""
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise ValidationError("thresholds must lie in [0,1]")
    if list(grid) != sorted(grid):
        raise ValidationError("threshold grid must be sorted")
    out = []
    for t in grid:
        out.append((t, evaluate(labels_from_threshold(p_good, t), gold)))
    return out


SWEEP_CSV_HEADER = (
    "threshold,precision_good,recall_good,f_good,precision_bad,recall_bad,f_bad,mean_f"
)


def sweep_csv(points: Sequence[tuple[float, EvalReport]]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for t, rep in points:
        lines.append(
            f"{t!r},{rep.good.precision!r},{rep.good.recall!r},{rep.good.f!r},"
            f"{rep.bad.precision!r},{rep.bad.recall!r},{rep.bad.f!r},{rep.mean_f!r}"
        )
    return "\n".join(lines) + "\n"


def label_stats(labels: Sequence[Label]) -> dict:
    """Percentage and count of each label over a corpus."""
    if not labels:
        raise ValidationError("empty corpus has no label statistics")
    n = len(labels)
    n_good = sum(1 for l in labels if l is Label.G)
    n_bad = n - n_good
    return {
        "n_tokens": n,
        "n_good": n_good,
        "n_bad": n_bad,
        "pct_good": 100.0 * n_good / n,
        "pct_bad": 100.0 * n_bad / n,
    }


def majority_baseline_mean_f(gold: Sequence[Label]) -> float:
    """Mean F of the constant predictor that always emits the majority class."""
    n_good = sum(1 for l in gold if l is Label.G)
    majority = Label.G if n_good >= len(gold) - n_good else Label.B
    return evaluate([majority] * len(gold), gold).mean_f
