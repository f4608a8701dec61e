"""Combine recognition-side and translation-side word confidences.

Per token, the two good-probabilities are merged by a weighted geometric
interpolation, p_asr(q)^alpha * p_mt(q)^(1-alpha) for q in {good, bad},
then renormalized over the two labels so the result is a proper posterior.
alpha = 1 reproduces the recognition-side input exactly, alpha = 0 the
translation-side input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .types import ValidationError


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha {self.alpha} outside [0,1]")


def combine_posteriors(
    p_asr_good: Sequence[float],
    p_mt_good: Sequence[float],
    cfg: FusionConfig = FusionConfig(),
) -> list[float]:
    if len(p_asr_good) != len(p_mt_good):
        raise ValidationError(
            f"length mismatch: {len(p_asr_good)} vs {len(p_mt_good)} tokens"
        )
    for p in (*p_asr_good, *p_mt_good):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability {p} outside [0,1]")
    alpha = cfg.alpha
    if alpha == 1.0:
        return list(p_asr_good)
    if alpha == 0.0:
        return list(p_mt_good)
    out = []
    for pa, pm in zip(p_asr_good, p_mt_good):
        u_good = pa ** alpha * pm ** (1.0 - alpha)
        u_bad = (1.0 - pa) ** alpha * (1.0 - pm) ** (1.0 - alpha)
        total = u_good + u_bad
        out.append(u_good / total if total > 0.0 else 0.5)
    return out
