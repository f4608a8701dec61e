"""Back-off n-gram language model: ARPA loading and probability queries.

Probabilities are handled in the log10 domain throughout, matching the ARPA
serialization.  Lookups are case-sensitive; unknown words map to ``<unk>``
when the model lists it, otherwise queries return a configurable floor.
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .types import ValidationError

UNK = "<unk>"
DEFAULT_FLOOR_LOG10 = -10.0


@dataclass(frozen=True)
class BackoffLm:
    """Immutable back-off model; ``entries[n]`` maps n-gram tuples to
    (log10 probability, back-off weight or None)."""

    order: int
    entries: tuple[dict, ...]  # index 0 unused
    vocab: frozenset[str]
    floor_log10: float = DEFAULT_FLOOR_LOG10

    def lookup(self, gram: tuple[str, ...]):
        n = len(gram)
        if n < 1 or n > self.order:
            return None
        return self.entries[n].get(gram)

    def query(self, context: Sequence[str], word: str):
        return query(self, context, word)

    def longest_match(self, tokens: Sequence[str], i: int) -> int:
        return longest_match(self, tokens, i)


def load_arpa(path, floor_log10: float = DEFAULT_FLOOR_LOG10) -> BackoffLm:
    """Parse an ARPA back-off model; gzip-compressed input is accepted."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as f:
        lines = f.read().split("\n")

    counts: dict[int, int] = {}
    lineno = 0
    n_lines = len(lines)
    while lineno < n_lines and lines[lineno].strip() != "\\data\\":
        lineno += 1
    if lineno == n_lines:
        raise ValidationError("ARPA: missing \\data\\ header")
    lineno += 1
    while lineno < n_lines:
        line = lines[lineno].strip()
        if not line:
            lineno += 1
            continue
        if line.startswith("\\"):
            break
        if not line.startswith("ngram "):
            raise ValidationError(f"ARPA line {lineno + 1}: expected 'ngram N=count'")
        try:
            n, c = line[len("ngram "):].split("=")
            counts[int(n)] = int(c)
        except ValueError:
            raise ValidationError(f"ARPA line {lineno + 1}: bad count entry {line!r}") from None
        lineno += 1
    if not counts:
        raise ValidationError("ARPA: no ngram counts declared")
    order = max(counts)

    entries: list[dict] = [dict() for _ in range(order + 1)]
    saw_end = False
    current_n: Optional[int] = None
    while lineno < n_lines:
        line = lines[lineno].strip()
        lineno += 1
        if not line:
            continue
        if line == "\\end\\":
            saw_end = True
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                current_n = int(line[1:-len("-grams:")])
            except ValueError:
                raise ValidationError(f"ARPA line {lineno}: bad section header {line!r}") from None
            if current_n not in counts:
                raise ValidationError(f"ARPA line {lineno}: undeclared section {line!r}")
            continue
        if current_n is None:
            raise ValidationError(f"ARPA line {lineno}: entry outside any section")
        parts = line.split()
        if len(parts) == current_n + 1:
            backoff = None
        elif len(parts) == current_n + 2:
            try:
                backoff = float(parts[-1])
            except ValueError:
                raise ValidationError(f"ARPA line {lineno}: bad back-off weight") from None
        else:
            raise ValidationError(
                f"ARPA line {lineno}: expected {current_n + 1} or {current_n + 2} fields, "
                f"got {len(parts)}"
            )
        try:
            logp = float(parts[0])
        except ValueError:
            raise ValidationError(f"ARPA line {lineno}: bad log probability {parts[0]!r}") from None
        gram = tuple(parts[1:current_n + 1])
        entries[current_n][gram] = (logp, backoff)
    if not saw_end:
        raise ValidationError("ARPA: missing \\end\\ marker")
    for n, declared in sorted(counts.items()):
        if len(entries[n]) != declared:
            raise ValidationError(
                f"ARPA: header declares {declared} {n}-grams but file lists {len(entries[n])}"
            )
    vocab = frozenset(g[0] for g in entries[1])
    return BackoffLm(order, tuple(entries), vocab, floor_log10)


def query(lm: BackoffLm, context: Sequence[str], word: str) -> tuple[float, int, int]:
    """Back-off probability of ``word`` after ``context``.

    Returns (log10 probability, back-off level, matched order).  The back-off
    level is requested order minus matched order, 0 when the full n-gram is
    listed.  Unknown words map to ``<unk>``; if the model has no ``<unk>``
    entry the query returns the floor probability at full back-off.
    """
    if len(context) > lm.order - 1:
        raise ValidationError(
            f"context of {len(context)} words exceeds order-{lm.order} model"
        )
    requested = len(context) + 1
    w = word if word in lm.vocab else UNK
    if w not in lm.vocab:
        return lm.floor_log10, requested - 1, 1
    ctx = [t if t in lm.vocab else UNK for t in context]
    acc = 0.0
    for k in range(requested, 0, -1):
        tail = tuple(ctx[len(ctx) - (k - 1):]) if k > 1 else ()
        hit = lm.entries[k].get(tail + (w,))
        if hit is not None:
            return acc + hit[0], requested - k, k
        if k > 1:
            ctx_entry = lm.entries[k - 1].get(tail)
            if ctx_entry is not None and ctx_entry[1] is not None:
                acc += ctx_entry[1]
    # vocabulary is built from listed unigrams, so this is unreachable for
    # well-formed models; floor defensively
    return lm.floor_log10 + acc, requested - 1, 0


def longest_match(lm: BackoffLm, tokens: Sequence[str], i: int) -> int:
    """Length of the longest listed n-gram ending at position ``i``.

    0 when even the unigram is unlisted; no unknown-word mapping is applied.
    """
    if not 0 <= i < len(tokens):
        raise ValidationError(f"token index {i} out of range")
    max_len = min(lm.order, i + 1)
    for L in range(max_len, 0, -1):
        gram = tuple(tokens[i - L + 1:i + 1])
        if gram in lm.entries[L]:
            return L
    return 0


def probability(lm: BackoffLm, context: Sequence[str], word: str) -> float:
    """Linear-domain convenience wrapper around :func:`query`."""
    logp, _, _ = query(lm, context, word)
    return 10.0 ** logp
