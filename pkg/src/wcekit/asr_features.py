"""Per-word features for speech recognition hypotheses.

Nine features per token: the word itself, trigram log probability, unigram
log probability, back-off level of the trigram query, confusion-network
alternative count and word posterior, slot duration, POS tag, and the
(previous POS, word, next POS) context triple with ``<s>``/``</s>`` at
sentence edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ngram import BackoffLm, query
from .types import CATEGORICAL, NUMERIC, ConfusionNetwork, FeatureTable, Sentence, ValidationError

BOS = "<s>"
EOS = "</s>"
NULL = "__null__"


@dataclass(frozen=True)
class AsrFeatureVector:
    f_word: str
    f_3g: float
    f_log: float
    f_back: float  # integer-valued at extraction; averaging during projection may fractionalize it
    f_alt: float
    f_post: float
    f_dur: float
    f_pos: str
    f_context: tuple[str, str, str]

    def __post_init__(self):
        for name in ("f_3g", "f_log", "f_back", "f_alt", "f_post", "f_dur"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if not 0.0 <= self.f_post <= 1.0:
            raise ValidationError(f"f_post {self.f_post} outside [0,1]")


ASR_FEATURE_COLUMNS = (
    ("f_word", CATEGORICAL),
    ("f_3g", NUMERIC),
    ("f_log", NUMERIC),
    ("f_back", NUMERIC),
    ("f_alt", NUMERIC),
    ("f_post", NUMERIC),
    ("f_dur", NUMERIC),
    ("f_pos", CATEGORICAL),
    ("f_context", CATEGORICAL),
)


def extract_asr_features(
    sent: Sentence, cn: ConfusionNetwork, lm: BackoffLm
) -> list[AsrFeatureVector]:
    """One feature vector per hypothesis token.

    The sentence must be POS-annotated and line up with the confusion
    network slot-for-slot; a hypothesis word missing from its own slot is an
    inconsistency and raises.
    """
    if len(sent) == 0:
        raise ValidationError("cannot extract features from an empty sentence")
    if len(sent) != len(cn):
        raise ValidationError(
            f"sentence has {len(sent)} tokens but confusion network has {len(cn)} slots"
        )
    if not sent.has_annotations:
        raise ValidationError("ASR feature extraction needs POS annotations")
    words = sent.surfaces()
    out = []
    for i, token in enumerate(sent):
        slot = cn[i]
        post = slot.posterior_of(token.surface)
        if post is None:
            raise ValidationError(
                f"slot {i}: hypothesis word {token.surface!r} not among its alternatives"
            )
        width = min(2, lm.order - 1)
        context = words[max(0, i - width):i]
        f_3g, f_back, _ = query(lm, context, token.surface)
        f_log, _, _ = query(lm, [], token.surface)
        left = sent[i - 1].pos if i > 0 else BOS
        right = sent[i + 1].pos if i + 1 < len(sent) else EOS
        out.append(AsrFeatureVector(
            f_word=token.surface,
            f_3g=f_3g,
            f_log=f_log,
            f_back=float(f_back),
            f_alt=float(len(slot.alternatives)),
            f_post=post,
            f_dur=slot.duration,
            f_pos=token.pos,
            f_context=(left, token.surface, right),
        ))
    return out


def asr_feature_table(sentences_vectors: list[list[AsrFeatureVector]]) -> FeatureTable:
    """Pack per-sentence ASR vectors into a feature table."""
    rows = []
    breaks = []
    for vectors in sentences_vectors:
        for v in vectors:
            rows.append((
                v.f_word, v.f_3g, v.f_log, v.f_back, v.f_alt, v.f_post, v.f_dur,
                v.f_pos, "|".join(v.f_context),
            ))
        breaks.append(len(rows))
    return FeatureTable(ASR_FEATURE_COLUMNS, tuple(rows), tuple(breaks))
