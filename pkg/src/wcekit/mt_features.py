"""Per-token features for machine translation hypotheses.

24 feature types per target token, drawing on the hypothesis itself, the
aligned source sentence, source/target language models, the translation
confusion network, a stoplist, and precomputed sidecar annotations (parser
output, polysemy counts, external-MT occurrence flags).

Feature availability is validated up front: enabling a feature whose
resource is missing raises :class:`ConfigError` before any token is
processed.  Disabled categorical features are emitted as the ``__off__``
sentinel; disabled numeric features are dropped from the output table.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Optional

from .asr_features import BOS, EOS, NULL
from .ngram import BackoffLm, longest_match, query
from .types import (
    CATEGORICAL,
    NUMERIC,
    FeatureTable,
    QuintupletRecord,
    Sentence,
    ValidationError,
    WordAlignment,
)


class ConfigError(ValidationError):
    """An enabled feature is missing a resource it needs."""


OFF = "__off__"

# (name, kind) in the canonical order
MT_FEATURES = (
    ("proper_name", CATEGORICAL),
    ("unknown_stem", CATEGORICAL),
    ("num_word_occ", NUMERIC),
    ("num_stem_occ", NUMERIC),
    ("polysemy_count_tgt", NUMERIC),
    ("backoff_behaviour_tgt", NUMERIC),
    ("alignment_feats", CATEGORICAL),
    ("occur_google", CATEGORICAL),
    ("occur_bing", CATEGORICAL),
    ("stop_word", CATEGORICAL),
    ("word_ctx_align", CATEGORICAL),
    ("pos_ctx_align", CATEGORICAL),
    ("stem_ctx_align", CATEGORICAL),
    ("longest_tgt_ngram", NUMERIC),
    ("longest_src_ngram", NUMERIC),
    ("wpp_exact", NUMERIC),
    ("wpp_any", NUMERIC),
    ("wpp_min", NUMERIC),
    ("wpp_max", NUMERIC),
    ("nodes", NUMERIC),
    ("constituent_label", CATEGORICAL),
    ("dist_to_root", NUMERIC),
    ("numeric", CATEGORICAL),
    ("punctuation", CATEGORICAL),
)

MT_FEATURE_NAMES = tuple(name for name, _ in MT_FEATURES)
MT_FEATURE_KIND = dict(MT_FEATURES)

_ALIGNMENT_FEATURES = frozenset(
    {"alignment_feats", "word_ctx_align", "pos_ctx_align", "stem_ctx_align", "longest_src_ngram"}
)
_CN_FEATURES = frozenset({"wpp_exact", "wpp_any", "wpp_min", "wpp_max", "nodes"})
_SIDECAR_FEATURES = frozenset({"occur_google", "occur_bing", "constituent_label", "dist_to_root"})

_NUMERIC_RE = re.compile(r"[+-]?\d+(?:[.,]\d+)*%?")


@dataclass(frozen=True)
class FeatureConfig:
    """Which MT features to extract, plus the lexical resources they use."""

    enabled: frozenset[str] = frozenset(MT_FEATURE_NAMES)
    stoplist: frozenset[str] = frozenset()
    polysemy: Optional[dict[str, int]] = None

    def __post_init__(self):
        unknown = self.enabled - frozenset(MT_FEATURE_NAMES)
        if unknown:
            raise ValidationError(f"unknown MT features: {sorted(unknown)}")

    @classmethod
    def all_features(cls, **kw) -> "FeatureConfig":
        return cls(frozenset(MT_FEATURE_NAMES), **kw)

    def without(self, *names: str) -> "FeatureConfig":
        return FeatureConfig(self.enabled - frozenset(names), self.stoplist, self.polysemy)


def load_stoplist(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip() for line in f if line.strip())


def load_polysemy(path) -> dict[str, int]:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ValidationError(f"line {lineno}: expected 'word<TAB>count'")
            try:
                out[parts[0]] = int(parts[1])
            except ValueError:
                raise ValidationError(f"line {lineno}: bad count {parts[1]!r}") from None
    return out


@dataclass(frozen=True)
class MtFeatureVector:
    """One target token's feature values; disabled features stay None."""

    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, name: str):
        return self.values.get(name)


def _target_field(record: QuintupletRecord, target: Sentence) -> Optional[str]:
    for name in ("e_hyp_mt", "e_hyp_slt", "e_ref"):
        if record.sentence(name) is target or record.sentence(name) == target:
            return name
    return None


def _boolean(v) -> str:
    return "1" if v else "0"


def _validate(record, target, field_name, cfg, src_lm, tgt_lm, source, align):
    need = cfg.enabled

    def sidecar_ok(col):
        return field_name is not None and record.sidecar_column(field_name, col) is not None

    if need & _ALIGNMENT_FEATURES and align is None:
        raise ConfigError("alignment-context features enabled but no word alignment given")
    if need & _CN_FEATURES:
        if record.cn_mt is None:
            raise ConfigError("WPP/Nodes features enabled but record has no translation CN")
        if len(record.cn_mt) != len(target):
            raise ConfigError(
                f"translation CN has {len(record.cn_mt)} slots for {len(target)} target tokens"
            )
    if ("backoff_behaviour_tgt" in need or "longest_tgt_ngram" in need) and tgt_lm is None:
        raise ConfigError("target n-gram features enabled but no target language model given")
    if ("longest_src_ngram" in need or "unknown_stem" in need) and src_lm is None:
        raise ConfigError("source-side LM features enabled but no source language model given")
    if "pos_ctx_align" in need and not (target.has_annotations and source.has_annotations):
        raise ConfigError("pos_ctx_align needs POS annotations on both sides")
    if "stem_ctx_align" in need and not (target.has_annotations and source.has_annotations):
        raise ConfigError("stem_ctx_align needs stem annotations on both sides")
    for feat in sorted(need & _SIDECAR_FEATURES):
        if not sidecar_ok(feat):
            raise ConfigError(f"{feat} enabled but sidecar column is missing")
    if "polysemy_count_tgt" in need and cfg.polysemy is None and not sidecar_ok("polysemy_count"):
        raise ConfigError("polysemy_count_tgt enabled but no lexicon or sidecar column")


def extract_mt_features(
    record: QuintupletRecord,
    target: Sentence,
    cfg: FeatureConfig,
    lms: tuple[Optional[BackoffLm], Optional[BackoffLm]] = (None, None),
    source: Optional[Sentence] = None,
    align: Optional[WordAlignment] = None,
) -> list[MtFeatureVector]:
    """Extract the enabled features for every token of ``target``.

    ``lms`` is (source LM, target LM).  ``source`` and ``align`` default to
    the record's ASR hypothesis and its stored alignment; pass them
    explicitly when labeling the text-translation hypothesis against its
    verbatim source.
    """
    if len(target) == 0:
        raise ValidationError("cannot extract features from an empty sentence")
    src_lm, tgt_lm = lms
    source = source if source is not None else record.f_hyp
    align = align if align is not None else record.align_src_tgt
    field_name = _target_field(record, target)
    _validate(record, target, field_name, cfg, src_lm, tgt_lm, source, align)
    if align is not None:
        align.check_bounds(len(source), len(target))

    need = cfg.enabled
    words = target.surfaces()
    stems = [t.stem if t.stem is not None else t.surface for t in target]
    src_words = source.surfaces()

    def sidecar(col):
        if field_name is None:
            return None
        return record.sidecar_column(field_name, col)

    proper_col = sidecar("proper_name")
    polysemy_col = sidecar("polysemy_count")
    google_col = sidecar("occur_google")
    bing_col = sidecar("occur_bing")
    constituent_col = sidecar("constituent_label")
    depth_col = sidecar("dist_to_root")

    out = []
    for i, token in enumerate(target):
        w = token.surface
        v: dict[str, object] = {}
        aligned = align.sources_of(i) if align is not None else []
        src_i = aligned[0] if aligned else None

        if "proper_name" in need:
            if proper_col is not None:
                v["proper_name"] = _boolean(proper_col[i])
            else:
                v["proper_name"] = _boolean(i > 0 and w[:1].isupper())
        if "unknown_stem" in need:
            v["unknown_stem"] = _boolean(stems[i] not in src_lm.vocab)
        if "num_word_occ" in need:
            v["num_word_occ"] = float(words.count(w))
        if "num_stem_occ" in need:
            v["num_stem_occ"] = float(stems.count(stems[i]))
        if "polysemy_count_tgt" in need:
            if polysemy_col is not None:
                v["polysemy_count_tgt"] = float(polysemy_col[i])
            else:
                v["polysemy_count_tgt"] = float(cfg.polysemy.get(w, 0))
        if "backoff_behaviour_tgt" in need:
            width = min(2, tgt_lm.order - 1)
            _, level, _ = query(tgt_lm, words[max(0, i - width):i], w)
            v["backoff_behaviour_tgt"] = float(level)
        if "alignment_feats" in need:
            if src_i is None:
                v["alignment_feats"] = NULL
            else:
                left = words[i - 1] if i > 0 else BOS
                right = words[i + 1] if i + 1 < len(words) else EOS
                v["alignment_feats"] = f"{src_words[src_i]}|{left}|{w}|{right}"
        if "occur_google" in need:
            v["occur_google"] = _boolean(google_col[i])
        if "occur_bing" in need:
            v["occur_bing"] = _boolean(bing_col[i])
        if "stop_word" in need:
            v["stop_word"] = _boolean(w in cfg.stoplist)
        if "word_ctx_align" in need:
            v["word_ctx_align"] = _source_context(w, src_i, src_words, None)
        if "pos_ctx_align" in need:
            src_pos = [t.pos for t in source]
            v["pos_ctx_align"] = _source_context(token.pos, src_i, src_pos, None)
        if "stem_ctx_align" in need:
            src_stems = [t.stem for t in source]
            v["stem_ctx_align"] = _source_context(stems[i], src_i, src_stems, None)
        if "longest_tgt_ngram" in need:
            v["longest_tgt_ngram"] = float(longest_match(tgt_lm, words, i))
        if "longest_src_ngram" in need:
            if src_i is None:
                v["longest_src_ngram"] = 0.0
            else:
                v["longest_src_ngram"] = float(longest_match(src_lm, src_words, src_i))
        if need & _CN_FEATURES:
            slot = record.cn_mt[i]
            if "wpp_exact" in need:
                v["wpp_exact"] = slot.posterior_of(w) or 0.0
            if "wpp_any" in need:
                v["wpp_any"] = max(
                    (s.posterior_of(w) or 0.0 for s in record.cn_mt), default=0.0
                )
            posts = [p for _, p in slot.alternatives]
            if "wpp_min" in need:
                v["wpp_min"] = min(posts)
            if "wpp_max" in need:
                v["wpp_max"] = max(posts)
            if "nodes" in need:
                v["nodes"] = float(len(slot.alternatives))
        if "constituent_label" in need:
            v["constituent_label"] = str(constituent_col[i])
        if "dist_to_root" in need:
            v["dist_to_root"] = float(depth_col[i])
        if "numeric" in need:
            v["numeric"] = _boolean(_NUMERIC_RE.fullmatch(w) is not None)
        if "punctuation" in need:
            v["punctuation"] = _boolean(all(unicodedata.category(c).startswith("P") for c in w))
        out.append(MtFeatureVector(v))
    return out


def _source_context(tgt_value, src_i, src_values, _unused) -> str:
    """Collocation category: target value | left source | aligned source | right source."""
    if src_i is None:
        return NULL
    left = src_values[src_i - 1] if src_i > 0 else BOS
    right = src_values[src_i + 1] if src_i + 1 < len(src_values) else EOS
    return f"{tgt_value}|{left}|{src_values[src_i]}|{right}"


def mt_feature_table(
    sentences_vectors: list[list[MtFeatureVector]], cfg: FeatureConfig
) -> FeatureTable:
    """Pack MT vectors into a table.

    Disabled categorical columns carry the ``__off__`` sentinel so the column
    layout is stable; disabled numeric columns are omitted entirely.
    """
    columns = []
    for name, kind in MT_FEATURES:
        if name in cfg.enabled:
            columns.append((name, kind))
        elif kind == CATEGORICAL:
            columns.append((name, kind))
    rows = []
    breaks = []
    for vectors in sentences_vectors:
        for v in vectors:
            row = []
            for name, kind in columns:
                if name in cfg.enabled:
                    row.append(v[name])
                else:
                    row.append(OFF)
            rows.append(tuple(row))
        breaks.append(len(rows))
    return FeatureTable(tuple(columns), tuple(rows), tuple(breaks))
