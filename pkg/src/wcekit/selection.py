"""Sequential backward selection over named feature columns.

Starting from the full set, repeatedly drop the feature whose removal gives
the highest objective value (the wrapper objective is typically "retrain the
labeler without that column and measure mean F"), until nothing is left.
With n features the objective runs exactly n(n+1)/2 times.  Ranks follow
the removal order in reverse: the feature that survives longest ranks 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence


class ObjectiveError(RuntimeError):
    """The wrapper objective failed; carries the offending subset."""

    def __init__(self, subset: frozenset, cause: BaseException):
        super().__init__(f"objective failed on subset {sorted(subset)}: {cause}")
        self.subset = subset


@dataclass(frozen=True)
class SbsResult:
    removal_order: tuple[str, ...]
    best_subset: frozenset[str]
    best_score: float
    curve: tuple[tuple[int, float], ...]  # (subset size, objective at chosen removal)

    @property
    def ranks(self) -> dict[str, int]:
        n = len(self.removal_order)
        return {name: n - i for i, name in enumerate(self.removal_order)}

    def as_dict(self) -> dict:
        return {
            "removal_order": list(self.removal_order),
            "ranks": self.ranks,
            "best_subset": sorted(self.best_subset),
            "best_score": self.best_score,
            "curve": [[k, mf] for k, mf in self.curve],
        }


def sbs(
    all_features: Sequence[str],
    objective: Callable[[frozenset], float],
    keep_curve: bool = True,
) -> SbsResult:
    """Run backward elimination; ties go to the lexicographically smallest name.

    If every candidate scores 0 in a round (so no removal strictly improves
    on the initial 0 bound), the lexicographically smallest feature is
    dropped so the loop always terminates.
    """
    features = list(all_features)
    if len(set(features)) != len(features) or not features:
        raise ValueError("feature names must be unique and non-empty")

    def call(subset: frozenset) -> float:
        try:
            return float(objective(subset))
        except Exception as e:  # noqa: BLE001 - re-raised with context
            raise ObjectiveError(subset, e) from e

    remaining = sorted(features)
    removal_order: list[str] = []
    curve: list[tuple[int, float]] = []
    best_subset: Optional[frozenset] = None
    best_score = float("-inf")
    while remaining:
        round_best: Optional[tuple[float, str]] = None
        for name in remaining:  # sorted, so first strict improvement wins ties
            candidate = frozenset(remaining) - {name}
            score = call(candidate)
            if score > best_score:
                best_score, best_subset = score, candidate
            if round_best is None or score > round_best[0]:
                round_best = (score, name)
        score, worst = round_best if round_best[0] > 0.0 else (round_best[0], remaining[0])
        remaining.remove(worst)
        removal_order.append(worst)
        curve.append((len(remaining), score))
    return SbsResult(
        tuple(removal_order),
        best_subset if best_subset is not None else frozenset(),
        best_score,
        tuple(curve) if keep_curve else (),
    )
