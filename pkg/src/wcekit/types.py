"""Core domain types shared by every part of the toolkit.

All types validate their invariants at construction time and are immutable
afterwards, so they can be shared freely across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


class ValidationError(ValueError):
    """An input file or structure violates a documented invariant."""


class NumericError(ArithmeticError):
    """A numeric computation failed (non-finite value, divergence)."""


class Label(enum.Enum):
    """Binary word-quality label: G (good) or B (bad)."""

    G = "G"
    B = "B"

    def __str__(self):
        return self.value

    @classmethod
    def from_string(cls, s: str) -> "Label":
        try:
            return cls(s)
        except ValueError:
            raise ValidationError(f"unknown label {s!r}, expected 'G' or 'B'") from None


class EditType(enum.Enum):
    """Word-level edit category from a hypothesis/reference alignment.

    E exact match, S substitution, T stem match, Y synonym match,
    P phrasal substitution, I insertion (hypothesis-only word),
    D deletion (reference-only word; never attaches to a hypothesis token).
    """

    E = "E"
    S = "S"
    T = "T"
    Y = "Y"
    P = "P"
    I = "I"
    D = "D"

    def __str__(self):
        return self.value


class Side(enum.Enum):
    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class Token:
    surface: str
    pos: Optional[str] = None
    stem: Optional[str] = None

    def __post_init__(self):
        if not self.surface:
            raise ValidationError("token surface must be non-empty")
        if any(c.isspace() for c in self.surface):
            raise ValidationError(f"token surface contains whitespace: {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    """An ordered, pre-tokenized sequence of tokens.

    POS and stem annotations are uniform: either every token carries both,
    or no token carries either.
    """

    tokens: tuple[Token, ...]
    side: Side = Side.TARGET

    def __post_init__(self):
        annotated = [t.pos is not None or t.stem is not None for t in self.tokens]
        if any(annotated):
            bad = [i for i, t in enumerate(self.tokens) if t.pos is None or t.stem is None]
            if bad:
                raise ValidationError(
                    f"POS/stem annotations must cover the whole sentence; "
                    f"token {bad[0]} is missing one"
                )

    @classmethod
    def from_string(
        cls,
        text: str,
        side: Side = Side.TARGET,
        pos: Optional[Sequence[str]] = None,
        stems: Optional[Sequence[str]] = None,
    ) -> "Sentence":
        """Build from whitespace-separated text with optional parallel annotations."""
        surfaces = text.split()
        if pos is not None or stems is not None:
            if pos is None or stems is None:
                raise ValidationError("POS and stem annotations must be given together")
            if len(pos) != len(surfaces) or len(stems) != len(surfaces):
                raise ValidationError(
                    f"annotation length mismatch: {len(surfaces)} tokens, "
                    f"{len(pos)} POS tags, {len(stems)} stems"
                )
            toks = tuple(Token(w, p, s) for w, p, s in zip(surfaces, pos, stems))
        else:
            toks = tuple(Token(w) for w in surfaces)
        return cls(toks, side)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def has_annotations(self) -> bool:
        return bool(self.tokens) and self.tokens[0].pos is not None

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True)
class WordAlignment:
    """Many-to-many word alignment as a set of (source_index, target_index) links.

    Indices are 0-based; the text serialization is the Pharaoh "i-j" convention.
    """

    links: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.links:
            if i < 0 or j < 0:
                raise ValidationError(f"negative alignment index in link {i}-{j}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "WordAlignment":
        pairs = list(pairs)
        if len(set(pairs)) != len(pairs):
            raise ValidationError("duplicate alignment links")
        return cls(frozenset(pairs))

    def check_bounds(self, src_len: int, tgt_len: int):
        for i, j in self.links:
            if i >= src_len or j >= tgt_len:
                raise ValidationError(
                    f"alignment link {i}-{j} out of bounds for "
                    f"{src_len} source / {tgt_len} target tokens"
                )

    def sources_of(self, target_index: int) -> list[int]:
        """Source indices aligned to a target token, in source order."""
        return sorted(i for i, j in self.links if j == target_index)

    def targets_of(self, source_index: int) -> list[int]:
        return sorted(j for i, j in self.links if i == source_index)


@dataclass(frozen=True)
class Slot:
    """One confusion-network slot: a time span with word alternatives."""

    start: float
    duration: float
    alternatives: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.start < 0 or self.duration < 0:
            raise ValidationError("slot start/duration must be >= 0")
        if not self.alternatives:
            raise ValidationError("slot must have at least one alternative")

    def posterior_of(self, word: str) -> Optional[float]:
        for w, p in self.alternatives:
            if w == word:
                return p
        return None

    def best(self) -> tuple[str, float]:
        return max(self.alternatives, key=lambda wp: wp[1])


POSTERIOR_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ConfusionNetwork:
    slots: tuple[Slot, ...]

    def __post_init__(self):
        for k, slot in enumerate(self.slots):
            total = sum(p for _, p in slot.alternatives)
            if abs(total - 1.0) > POSTERIOR_SUM_TOL:
                raise ValidationError(
                    f"slot {k}: posteriors sum to {total:.6f}, expected 1"
                )
            for w, p in slot.alternatives:
                if not 0.0 <= p <= 1.0:
                    raise ValidationError(f"slot {k}: posterior {p} for {w!r} outside [0,1]")
        for k in range(1, len(self.slots)):
            if self.slots[k].start < self.slots[k - 1].start:
                raise ValidationError(
                    f"slot {k} starts at {self.slots[k].start}, before slot {k - 1}"
                )

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __getitem__(self, i):
        return self.slots[i]


@dataclass(frozen=True)
class QuintupletRecord:
    """One utterance: the five parallel texts plus optional acoustic evidence,
    word alignment and per-token sidecar annotations.

    `align_src_tgt` links f_hyp (source) to e_hyp_slt (target).  Sidecar keys
    are per-token columns for a named sentence field, e.g.
    "e_hyp_slt_polysemy_count".
    """

    id: str
    f_ref: Sentence
    f_hyp: Sentence
    e_hyp_mt: Sentence
    e_hyp_slt: Sentence
    e_ref: Sentence
    cn_asr: Optional[ConfusionNetwork] = None
    cn_mt: Optional[ConfusionNetwork] = None
    align_src_tgt: Optional[WordAlignment] = None
    sidecar: dict[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.cn_asr is not None and len(self.cn_asr) != len(self.f_hyp):
            raise ValidationError(
                f"record {self.id}: f_hyp has {len(self.f_hyp)} tokens but "
                f"cn_asr has {len(self.cn_asr)} slots"
            )
        if self.align_src_tgt is not None:
            try:
                self.align_src_tgt.check_bounds(len(self.f_hyp), len(self.e_hyp_slt))
            except ValidationError as e:
                raise ValidationError(f"record {self.id}: {e}") from None

    def sentence(self, name: str) -> Sentence:
        if name not in ("f_ref", "f_hyp", "e_hyp_mt", "e_hyp_slt", "e_ref"):
            raise ValidationError(f"unknown sentence field {name!r}")
        return getattr(self, name)

    def sidecar_column(self, field_name: str, column: str) -> Optional[tuple]:
        """Look up a sidecar column for one sentence field, or None."""
        return self.sidecar.get(f"{field_name}_{column}")


CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True)
class FeatureTable:
    """Rectangular per-token feature columns for one or more sentences.

    `columns` pairs each name with its kind ("categorical" or "numeric");
    categorical cells are strings, numeric cells are finite floats.
    `sentence_breaks` holds the exclusive end row index of each sentence.
    """

    columns: tuple[tuple[str, str], ...]
    rows: tuple[tuple, ...]
    sentence_breaks: tuple[int, ...]

    def __post_init__(self):
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate feature column names")
        for name, kind in self.columns:
            if kind not in (CATEGORICAL, NUMERIC):
                raise ValidationError(f"column {name!r}: unknown kind {kind!r}")
        ncol = len(self.columns)
        for r, row in enumerate(self.rows):
            if len(row) != ncol:
                raise ValidationError(f"row {r} has {len(row)} values, expected {ncol}")
            for (name, kind), v in zip(self.columns, row):
                if kind == NUMERIC:
                    if not isinstance(v, (int, float)) or not math.isfinite(v):
                        raise ValidationError(f"row {r}, column {name!r}: non-finite value {v!r}")
                elif not isinstance(v, str):
                    raise ValidationError(f"row {r}, column {name!r}: expected string, got {v!r}")
        if self.sentence_breaks:
            prev = 0
            for b in self.sentence_breaks:
                if b <= prev:
                    raise ValidationError("sentence breaks must be strictly increasing")
                prev = b
            if prev != len(self.rows):
                raise ValidationError(
                    f"last sentence break {prev} does not cover {len(self.rows)} rows"
                )
        elif self.rows:
            raise ValidationError("non-empty table needs sentence breaks")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_sentences(self) -> int:
        return len(self.sentence_breaks)

    def column_names(self) -> list[str]:
        return [n for n, _ in self.columns]

    def column_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.columns):
            if n == name:
                return i
        raise KeyError(name)

    def sentence_spans(self) -> list[tuple[int, int]]:
        spans, start = [], 0
        for end in self.sentence_breaks:
            spans.append((start, end))
            start = end
        return spans

    def drop_column(self, name: str) -> "FeatureTable":
        idx = self.column_index(name)
        cols = tuple(c for i, c in enumerate(self.columns) if i != idx)
        rows = tuple(tuple(v for i, v in enumerate(row) if i != idx) for row in self.rows)
        return FeatureTable(cols, rows, self.sentence_breaks)

    def select_columns(self, names: Sequence[str]) -> "FeatureTable":
        idxs = [self.column_index(n) for n in names]
        cols = tuple(self.columns[i] for i in idxs)
        rows = tuple(tuple(row[i] for i in idxs) for row in self.rows)
        return FeatureTable(cols, rows, self.sentence_breaks)


def concat_tables(tables: Sequence[FeatureTable]) -> FeatureTable:
    """Stack tables with identical columns into one multi-sentence table."""
    tables = [t for t in tables if t.n_rows or t.n_sentences]
    if not tables:
        return FeatureTable((), (), ())
    cols = tables[0].columns
    for t in tables[1:]:
        if t.columns != cols:
            raise ValidationError("cannot concatenate tables with different columns")
    rows: list[tuple] = []
    breaks: list[int] = []
    for t in tables:
        offset = len(rows)
        rows.extend(t.rows)
        breaks.extend(offset + b for b in t.sentence_breaks)
    return FeatureTable(cols, tuple(rows), tuple(breaks))
