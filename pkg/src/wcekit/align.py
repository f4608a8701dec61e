"""Hypothesis/reference alignment and good-bad label generation.

Two aligners:

* :func:`align_wer` — classic minimum-edit alignment under unit costs,
  used to label speech recognition output against a verbatim transcript.
* :func:`align_ter_shift` — shift-aware alignment with relaxed matching
  (stem, synonym and phrase-table matches at reduced cost), used to label
  translation output against a post-edition.  A greedy loop moves hypothesis
  blocks that match a reference span whenever the move cuts the remaining
  edit cost by at least the shift cost, then a dynamic program assigns one
  edit type per hypothesis token.

Ties between equal-cost paths are resolved by preferring the path with the
most (exact/stem/synonym) matches, then by step type in the order
match > phrase > substitute > delete > insert.  This keeps per-token edit
types as informative as possible and makes both aligners deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .types import EditType, Label, Sentence, ValidationError

Tokens = Union[Sentence, Sequence[str]]


@dataclass(frozen=True)
class EditStep:
    """One step of an edit path.

    Spans are half-open index ranges.  For shift steps, ``hyp_span`` is the
    block location before the move (in the token order current at that time)
    and ``shift_dest`` the insertion index after removing the block.
    """

    op: str  # match | substitute | insert | delete | shift
    hyp_span: Optional[tuple[int, int]] = None
    ref_span: Optional[tuple[int, int]] = None
    match_kind: Optional[str] = None  # exact | stem | synonym | phrase
    cost: float = 0.0
    shift_dest: Optional[int] = None


@dataclass(frozen=True)
class EditPath:
    """Aligned edit steps plus their total cost.

    ``hyp_order`` maps post-shift hypothesis positions (the coordinates used
    by non-shift step spans) back to original token indices.
    """

    steps: tuple[EditStep, ...]
    total_cost: float
    hyp_order: tuple[int, ...] = ()


@dataclass(frozen=True)
class TerConfig:
    cost_exact: float = 0.0
    cost_stem: float = 0.2
    cost_synonym: float = 0.2
    cost_substitute: float = 1.0
    cost_insert: float = 1.0
    cost_delete: float = 1.0
    cost_shift: float = 1.0
    cost_phrase: float = 0.9  # used when a paraphrase entry carries no cost
    max_shift_block: int = 10
    max_shift_distance: int = 50
    max_shifts: int = 10

    def __post_init__(self):
        others = (
            self.cost_stem, self.cost_synonym, self.cost_substitute,
            self.cost_insert, self.cost_delete, self.cost_shift, self.cost_phrase,
        )
        if any(c < self.cost_exact for c in others):
            raise ValidationError("cost_exact must not exceed any other edit cost")
        if min(self.max_shift_block, self.max_shift_distance, self.max_shifts) < 1:
            raise ValidationError("shift limits must be >= 1")


Phrase = tuple[str, ...]


@dataclass(frozen=True)
class MatchResources:
    """Synonym pairs, paraphrase table and stem policy for relaxed matching."""

    synonym_pairs: frozenset[tuple[str, str]] = frozenset()
    paraphrase_table: tuple[tuple[Phrase, Phrase, Optional[float]], ...] = ()
    stem_source: str = "token-stem-column"  # or "disabled"

    def __post_init__(self):
        if self.stem_source not in ("token-stem-column", "disabled"):
            raise ValidationError(f"unknown stem_source {self.stem_source!r}")
        for hp, rp, _ in self.paraphrase_table:
            if not hp or not rp:
                raise ValidationError("paraphrase phrases must be non-empty")

    @classmethod
    def build(cls, synonym_pairs=(), paraphrases=(), stem_source="token-stem-column"):
        """Normalize synonym pairs to unordered form and phrase entries to tuples."""
        pairs = set()
        for a, b in synonym_pairs:
            pairs.add((a, b) if a <= b else (b, a))
        table = tuple(
            (tuple(hp.split() if isinstance(hp, str) else hp),
             tuple(rp.split() if isinstance(rp, str) else rp),
             cost)
            for hp, rp, cost in paraphrases
        )
        return cls(frozenset(pairs), table, stem_source)

    def is_synonym(self, a: str, b: str) -> bool:
        key = (a, b) if a <= b else (b, a)
        return key in self.synonym_pairs


def load_synonyms(path) -> list[tuple[str, str]]:
    """Read one tab-separated word pair per line."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValidationError(f"line {lineno}: expected 'word<TAB>word'")
            pairs.append((parts[0], parts[1]))
    return pairs


def load_paraphrases(path) -> list[tuple[str, str, Optional[float]]]:
    """Read `hyp phrase TAB ref phrase TAB cost?` lines."""
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ValidationError(f"line {lineno}: expected 2 or 3 tab-separated fields")
            cost = None
            if len(parts) == 3 and parts[2]:
                try:
                    cost = float(parts[2])
                except ValueError:
                    raise ValidationError(f"line {lineno}: bad cost {parts[2]!r}") from None
            entries.append((parts[0], parts[1], cost))
    return entries


def _surfaces(tokens: Tokens) -> list[str]:
    if isinstance(tokens, Sentence):
        return [t.surface for t in tokens.tokens]
    return [str(t) for t in tokens]


def _stems(tokens: Tokens) -> list[Optional[str]]:
    if isinstance(tokens, Sentence):
        return [t.stem for t in tokens.tokens]
    return [None] * len(tokens)


# --- WER alignment --------------------------------------------------------

_M, _S, _D, _I = 0, 1, 2, 3  # backpointer codes


def align_wer(hyp: Tokens, ref: Tokens) -> tuple[EditPath, list[Label], float]:
    """Minimum-edit alignment under unit costs.

    Returns the edit path, one G/B label per hypothesis token (G only for
    exact matches) and WER = (S+I+D) / |ref|.
    """
    h, r = _surfaces(hyp), _surfaces(ref)
    if not h or not r:
        raise ValidationError("align_wer needs non-empty hypothesis and reference")
    m, n = len(h), len(r)
    width = n + 1
    # cell value: cost * (m + n + 1) - matches, so lexicographic
    # (cost, -matches) ordering collapses into a single int comparison
    scale = m + n + 1
    value = [0] * ((m + 1) * width)
    ptr = [0] * ((m + 1) * width)
    for j in range(1, width):
        value[j] = j * scale
        ptr[j] = _D
    for i in range(1, m + 1):
        base = i * width
        value[base] = i * scale
        ptr[base] = _I
        hw = h[i - 1]
        for j in range(1, width):
            if hw == r[j - 1]:
                best = value[base - width + j - 1] - 1
                code = _M
            else:
                best = value[base - width + j - 1] + scale
                code = _S
            cand = value[base + j - 1] + scale  # delete ref word
            if cand < best:
                best, code = cand, _D
            cand = value[base - width + j] + scale  # insert hyp word
            if cand < best:
                best, code = cand, _I
            value[base + j] = best
            ptr[base + j] = code
    # backtrace
    steps_rev: list[EditStep] = []
    labels_rev: list[Label] = []
    edits = 0
    i, j = m, n
    while i > 0 or j > 0:
        code = ptr[i * width + j]
        if code == _M:
            steps_rev.append(EditStep("match", (i - 1, i), (j - 1, j), "exact"))
            labels_rev.append(Label.G)
            i, j = i - 1, j - 1
        elif code == _S:
            steps_rev.append(EditStep("substitute", (i - 1, i), (j - 1, j), cost=1.0))
            labels_rev.append(Label.B)
            edits += 1
            i, j = i - 1, j - 1
        elif code == _D:
            steps_rev.append(EditStep("delete", None, (j - 1, j), cost=1.0))
            edits += 1
            j -= 1
        else:
            steps_rev.append(EditStep("insert", (i - 1, i), None, cost=1.0))
            labels_rev.append(Label.B)
            edits += 1
            i -= 1
    path = EditPath(tuple(reversed(steps_rev)), float(edits), tuple(range(m)))
    return path, list(reversed(labels_rev)), edits / n


# --- shift-aware relaxed alignment ----------------------------------------


def _token_relation(hw, hs, rw, rs, res: MatchResources, cfg: TerConfig):
    """Best single-token match relation, as (cost, kind), or None."""
    if hw == rw:
        return cfg.cost_exact, "exact"
    best = None
    if res.stem_source == "token-stem-column" and hs is not None and rs is not None and hs == rs:
        best = (cfg.cost_stem, "stem")
    if res.is_synonym(hw, rw):
        if best is None or cfg.cost_synonym < best[0]:
            best = (cfg.cost_synonym, "synonym")
    return best


def _relaxed_dp(h, hs, r, rs, res: MatchResources, cfg: TerConfig, need_path: bool):
    """DP over (hyp index, ref index); cells hold (cost, -matches).

    Candidate steps are tried in the tie-break order match > phrase >
    substitute > delete > insert; strictly better (cost, -matches) wins.
    """
    m, n = len(h), len(r)
    INF = float("inf")
    cost = [[INF] * (n + 1) for _ in range(m + 1)]
    negm = [[0] * (n + 1) for _ in range(m + 1)]
    ptr = [[None] * (n + 1) for _ in range(m + 1)] if need_path else None
    cost[0][0] = 0.0
    for j in range(1, n + 1):
        cost[0][j] = cost[0][j - 1] + cfg.cost_delete
        if need_path:
            ptr[0][j] = ("delete",)
    for i in range(1, m + 1):
        cost[i][0] = cost[i - 1][0] + cfg.cost_insert
        if need_path:
            ptr[i][0] = ("insert",)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            best_c, best_m, best_p = INF, 0, None
            rel = _token_relation(h[i - 1], hs[i - 1], r[j - 1], rs[j - 1], res, cfg)
            if rel is not None:
                c = cost[i - 1][j - 1] + rel[0]
                mm = negm[i - 1][j - 1] - 1
                best_c, best_m, best_p = c, mm, ("match", rel[1])
            for hp, rp, pcost in res.paraphrase_table:
                lh, lr = len(hp), len(rp)
                if lh <= i and lr <= j and tuple(h[i - lh:i]) == hp and tuple(r[j - lr:j]) == rp:
                    c = cost[i - lh][j - lr] + (pcost if pcost is not None else cfg.cost_phrase)
                    mm = negm[i - lh][j - lr]
                    if c < best_c or (c == best_c and mm < best_m):
                        step_cost = pcost if pcost is not None else cfg.cost_phrase
                        best_c, best_m, best_p = c, mm, ("phrase", lh, lr, step_cost)
            c = cost[i - 1][j - 1] + cfg.cost_substitute
            mm = negm[i - 1][j - 1]
            if c < best_c or (c == best_c and mm < best_m):
                best_c, best_m, best_p = c, mm, ("substitute",)
            c = cost[i][j - 1] + cfg.cost_delete
            mm = negm[i][j - 1]
            if c < best_c or (c == best_c and mm < best_m):
                best_c, best_m, best_p = c, mm, ("delete",)
            c = cost[i - 1][j] + cfg.cost_insert
            mm = negm[i - 1][j]
            if c < best_c or (c == best_c and mm < best_m):
                best_c, best_m, best_p = c, mm, ("insert",)
            cost[i][j] = best_c
            negm[i][j] = best_m
            if need_path:
                ptr[i][j] = best_p
    if not need_path:
        return cost[m][n], None
    steps_rev = []
    i, j = m, n
    while i > 0 or j > 0:
        p = ptr[i][j]
        if p[0] == "match":
            kind = p[1]
            c = {"exact": cfg.cost_exact, "stem": cfg.cost_stem, "synonym": cfg.cost_synonym}[kind]
            steps_rev.append(EditStep("match", (i - 1, i), (j - 1, j), kind, c))
            i, j = i - 1, j - 1
        elif p[0] == "phrase":
            lh, lr, c = p[1], p[2], p[3]
            steps_rev.append(EditStep("substitute", (i - lh, i), (j - lr, j), "phrase", c))
            i, j = i - lh, j - lr
        elif p[0] == "substitute":
            steps_rev.append(EditStep("substitute", (i - 1, i), (j - 1, j), cost=cfg.cost_substitute))
            i, j = i - 1, j - 1
        elif p[0] == "delete":
            steps_rev.append(EditStep("delete", None, (j - 1, j), cost=cfg.cost_delete))
            j -= 1
        else:
            steps_rev.append(EditStep("insert", (i - 1, i), None, cost=cfg.cost_insert))
            i -= 1
    return cost[m][n], list(reversed(steps_rev))


def _matching_spans(h, hs, r, rs, start, length, res, cfg) -> list[int]:
    """Reference start indices of spans the block matches token-by-token."""
    spans = []
    for j in range(len(r) - length + 1):
        if all(
            _token_relation(h[start + k], hs[start + k], r[j + k], rs[j + k], res, cfg) is not None
            for k in range(length)
        ):
            spans.append(j)
    return spans


def _error_flags(steps, m, n) -> tuple[list[bool], list[bool]]:
    """Per-position error flags (hyp, ref) for an alignment's non-match steps."""
    herr = [True] * m
    rerr = [True] * n
    for step in steps:
        if step.op == "match":
            herr[step.hyp_span[0]] = False
            rerr[step.ref_span[0]] = False
    return herr, rerr


def _ref_to_hyp(steps, n) -> list[Optional[int]]:
    """Hypothesis position consuming each reference index, None for deletions."""
    ralign: list[Optional[int]] = [None] * n
    for step in steps:
        if step.hyp_span is None or step.ref_span is None:
            continue
        h0, h1 = step.hyp_span
        for k, j in enumerate(range(*step.ref_span)):
            ralign[j] = min(h0 + k, h1 - 1)
    return ralign


def enumerate_shifts(h, hs, r, rs, res: MatchResources, cfg: TerConfig, steps):
    """Allowed (start, length, dest) block moves given the current best path.

    A block may move when it matches a reference span token-by-token under
    the relaxed relation and either the block or that span is mis-aligned in
    the current path.  Its destination is anchored where the span sits under
    the current alignment, so blocks travel toward the place they match;
    ``dest`` is the insertion index after removing the block and must differ
    from ``start`` by at most ``max_shift_distance``.
    """
    m, n = len(h), len(r)
    herr, rerr = _error_flags(steps, m, n)
    ralign = _ref_to_hyp(steps, n)
    next_aligned = [m] * (n + 1)
    for j in range(n - 1, -1, -1):
        next_aligned[j] = ralign[j] if ralign[j] is not None else next_aligned[j + 1]
    out = set()
    for start in range(m):
        for length in range(1, min(cfg.max_shift_block, m - start) + 1):
            if length > n:
                break
            block_err = any(herr[start:start + length])
            for j in _matching_spans(h, hs, r, rs, start, length, res, cfg):
                if not block_err and not any(rerr[j:j + length]):
                    continue
                anchor = next_aligned[j]
                if start <= anchor < start + length:
                    continue
                dest = anchor - length if anchor >= start + length else anchor
                if dest == start or abs(dest - start) > cfg.max_shift_distance:
                    continue
                out.add((start, length, dest))
    return sorted(out)


def apply_shift(seq: list, start: int, length: int, dest: int) -> list:
    block = seq[start:start + length]
    rest = seq[:start] + seq[start + length:]
    return rest[:dest] + block + rest[dest:]


def align_ter_shift(
    hyp: Tokens,
    ref: Tokens,
    res: Optional[MatchResources] = None,
    cfg: Optional[TerConfig] = None,
) -> tuple[EditPath, list[EditType]]:
    """Shift-aware relaxed alignment; returns the path and one edit type per
    hypothesis token (in original token order).

    The greedy loop applies, among all allowed block moves (see
    :func:`enumerate_shifts`), the one whose post-move edit cost is lowest
    (ties: smallest block start, then smallest block, then smallest
    displacement), and only while the cost reduction is at least
    ``cost_shift`` — so shifting never increases the total.  Blocks that are
    already fully matched in place, with their matching reference spans also
    clean, are never moved.
    """
    res = res if res is not None else MatchResources.build()
    cfg = cfg if cfg is not None else TerConfig()
    h, r = _surfaces(hyp), _surfaces(ref)
    hs, rs = _stems(hyp), _stems(ref)
    if not h or not r:
        raise ValidationError("align_ter_shift needs non-empty hypothesis and reference")

    order = list(range(len(h)))
    shift_steps: list[EditStep] = []
    current_cost, current_steps = _relaxed_dp(h, hs, r, rs, res, cfg, need_path=True)
    while len(shift_steps) < cfg.max_shifts:
        best_key, best_move = None, None
        for start, length, dest in enumerate_shifts(h, hs, r, rs, res, cfg, current_steps):
            nh = apply_shift(h, start, length, dest)
            nhs = apply_shift(hs, start, length, dest)
            c, _ = _relaxed_dp(nh, nhs, r, rs, res, cfg, need_path=False)
            key = (c, start, length, abs(dest - start))
            if best_key is None or key < best_key:
                best_key, best_move = key, (start, length, dest, nh, nhs)
        if best_move is None:
            break
        new_cost = best_key[0]
        if not (new_cost < current_cost and current_cost - new_cost >= cfg.cost_shift):
            break
        start, length, dest, h, hs = best_move
        order = apply_shift(order, start, length, dest)
        shift_steps.append(
            EditStep("shift", (start, start + length), None, cost=cfg.cost_shift, shift_dest=dest)
        )
        current_cost, current_steps = _relaxed_dp(h, hs, r, rs, res, cfg, need_path=True)

    dp_cost, dp_steps = current_cost, current_steps
    types: list[Optional[EditType]] = [None] * len(h)
    kind_to_type = {"exact": EditType.E, "stem": EditType.T, "synonym": EditType.Y}
    for step in dp_steps:
        if step.op == "match":
            types[step.hyp_span[0]] = kind_to_type[step.match_kind]
        elif step.op == "substitute":
            t = EditType.P if step.match_kind == "phrase" else EditType.S
            for p in range(*step.hyp_span):
                types[p] = t
        elif step.op == "insert":
            types[step.hyp_span[0]] = EditType.I
    by_original: list[EditType] = [None] * len(h)  # type: ignore[list-item]
    for pos, orig in enumerate(order):
        by_original[orig] = types[pos]
    total = len(shift_steps) * cfg.cost_shift + dp_cost
    path = EditPath(tuple(shift_steps) + tuple(dp_steps), total, tuple(order))
    return path, by_original


def collapse_labels(edit_types: Sequence[EditType]) -> list[Label]:
    """Fold six edit types into G/B: E, T, Y are good; S, P, I are bad."""
    out = []
    for t in edit_types:
        if t is EditType.D:
            raise ValidationError(
                "D edits attach to the reference only; strip them before collapsing"
            )
        out.append(Label.G if t in (EditType.E, EditType.T, EditType.Y) else Label.B)
    return out
