"""Transfer per-source-word features and confidences onto target tokens.

A target word aligned to exactly one source word receives a copy of that
word's vector.  With several aligned source words, numeric features are
pooled (mean for posteriors/log-probabilities/back-off, max for duration,
trigram score and alternative count) and the symbolic features follow the
strategy: ``joint1`` keeps the first source word's value, ``joint2`` the
last, ``joint3`` concatenates with underscores.  Unaligned target words
duplicate the previous target word's projected vector; the first target
word falls back to a neutral vector.
"""

from __future__ import annotations

from typing import Sequence

from .asr_features import NULL, AsrFeatureVector
from .ngram import DEFAULT_FLOOR_LOG10
from .types import Sentence, ValidationError, WordAlignment

STRATEGIES = ("joint1", "joint2", "joint3")


def neutral_vector(lm_order: int = 3, floor_log10: float = DEFAULT_FLOOR_LOG10) -> AsrFeatureVector:
    """Stand-in for a leading target word with no aligned source word."""
    return AsrFeatureVector(
        f_word=NULL,
        f_3g=floor_log10,
        f_log=floor_log10,
        f_back=float(lm_order - 1),
        f_alt=1.0,
        f_post=0.5,
        f_dur=0.0,
        f_pos=NULL,
        f_context=(NULL, NULL, NULL),
    )


def project_asr_features(
    target: Sentence,
    align: WordAlignment,
    src_feats: Sequence[AsrFeatureVector],
    strategy: str = "joint1",
    lm_order: int = 3,
    floor_log10: float = DEFAULT_FLOOR_LOG10,
) -> list[AsrFeatureVector]:
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown projection strategy {strategy!r}")
    align.check_bounds(len(src_feats), len(target))
    out: list[AsrFeatureVector] = []
    for t in range(len(target)):
        sources = align.sources_of(t)
        if not sources:
            out.append(out[-1] if out else neutral_vector(lm_order, floor_log10))
            continue
        if len(sources) == 1:
            out.append(src_feats[sources[0]])
            continue
        feats = [src_feats[s] for s in sources]
        if strategy == "joint1":
            f_word, f_pos = feats[0].f_word, feats[0].f_pos
        elif strategy == "joint2":
            f_word, f_pos = feats[-1].f_word, feats[-1].f_pos
        else:
            f_word = "_".join(f.f_word for f in feats)
            f_pos = "_".join(f.f_pos for f in feats)
        left = src_feats[sources[0] - 1].f_pos if sources[0] > 0 else "<s>"
        right = src_feats[sources[-1] + 1].f_pos if sources[-1] + 1 < len(src_feats) else "</s>"
        out.append(AsrFeatureVector(
            f_word=f_word,
            f_3g=max(f.f_3g for f in feats),
            f_log=sum(f.f_log for f in feats) / len(feats),
            f_back=sum(f.f_back for f in feats) / len(feats),
            f_alt=max(f.f_alt for f in feats),
            f_post=sum(f.f_post for f in feats) / len(feats),
            f_dur=max(f.f_dur for f in feats),
            f_pos=f_pos,
            f_context=(left, f_word, right),
        ))
    return out


def project_confidence(
    target: Sentence,
    align: WordAlignment,
    src_conf: Sequence[float],
) -> list[float]:
    """Project per-source-word confidence scores onto the target tokens."""
    for p in src_conf:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"confidence {p} outside [0,1]")
    align.check_bounds(len(src_conf), len(target))
    out: list[float] = []
    for t in range(len(target)):
        sources = align.sources_of(t)
        if not sources:
            out.append(out[-1] if out else 0.5)
        else:
            out.append(sum(src_conf[s] for s in sources) / len(sources))
    return out
