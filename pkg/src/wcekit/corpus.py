"""Readers and writers for the corpus and dataset file formats.

Formats:

* Quintuplet corpus, JSON Lines: one object per utterance with fields
  ``id, f_ref, f_hyp, e_hyp_mt, e_hyp_slt, e_ref`` (space-separated token
  strings) and optional ``cn_asr, cn_mt, align_src_tgt, sidecar``.
  Confusion networks are encoded as ``[[start, dur, [[word, p], ...]], ...]``;
  the alignment is a Pharaoh "i-j" string.  Sidecar keys ``<field>_pos`` and
  ``<field>_stem`` attach annotations to the named sentence; all other keys
  stay as per-token columns.
* Quintuplet corpus, columns: one utterance per line, six tab-separated
  fields in the order above (no optional material).
* Confusion network text: one slot per line ``start dur w1:p1 w2:p2 ...``,
  blank line between sentence blocks.
* Alignments: one sentence per line of space-separated ``i-j`` pairs.
* Feature dataset: token per line, tab-separated columns, blank line after
  each sentence, label as last column when present.  A ``#columns`` header
  carries column names and kinds so tables round-trip losslessly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from .types import (
    CATEGORICAL,
    NUMERIC,
    ConfusionNetwork,
    FeatureTable,
    Label,
    QuintupletRecord,
    Sentence,
    Side,
    Slot,
    ValidationError,
    WordAlignment,
)

SENTENCE_FIELDS = ("f_ref", "f_hyp", "e_hyp_mt", "e_hyp_slt", "e_ref")


def parse_pharaoh(text: str) -> WordAlignment:
    """Parse one line of space-separated ``i-j`` alignment pairs."""
    pairs = []
    for item in text.split():
        try:
            i, j = item.split("-")
            pairs.append((int(i), int(j)))
        except ValueError:
            raise ValidationError(f"bad alignment pair {item!r}, expected 'i-j'") from None
    return WordAlignment.from_pairs(pairs)


def format_pharaoh(align: WordAlignment) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(align.links))


def _cn_from_json(data, where: str) -> ConfusionNetwork:
    slots = []
    for k, item in enumerate(data):
        try:
            start, dur, alts = item
            slots.append(Slot(float(start), float(dur), tuple((str(w), float(p)) for w, p in alts)))
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"{where}: malformed slot {k}: {item!r}") from None
    return ConfusionNetwork(tuple(slots))


def _cn_to_json(cn: ConfusionNetwork):
    return [[s.start, s.duration, [[w, p] for w, p in s.alternatives]] for s in cn.slots]


def _sentence_from_record(obj: dict, name: str, side: Side, where: str) -> Sentence:
    text = obj.get(name)
    if not isinstance(text, str):
        raise ValidationError(f"{where}: field {name!r} missing or not a string")
    sidecar = obj.get("sidecar") or {}
    pos = sidecar.get(f"{name}_pos")
    stems = sidecar.get(f"{name}_stem")
    try:
        return Sentence.from_string(text, side, pos=pos, stems=stems)
    except ValidationError as e:
        raise ValidationError(f"{where}: field {name!r}: {e}") from None


def record_from_json(obj: dict, where: str = "record") -> QuintupletRecord:
    rec_id = obj.get("id")
    if not isinstance(rec_id, str):
        raise ValidationError(f"{where}: field 'id' missing or not a string")
    sents = {}
    for name in SENTENCE_FIELDS:
        side = Side.SOURCE if name.startswith("f_") else Side.TARGET
        sents[name] = _sentence_from_record(obj, name, side, where)
    cn_asr = cn_mt = align = None
    if obj.get("cn_asr") is not None:
        cn_asr = _cn_from_json(obj["cn_asr"], f"{where}: field 'cn_asr'")
    if obj.get("cn_mt") is not None:
        cn_mt = _cn_from_json(obj["cn_mt"], f"{where}: field 'cn_mt'")
    if obj.get("align_src_tgt") is not None:
        align = parse_pharaoh(obj["align_src_tgt"])
    sidecar = {}
    for key, value in (obj.get("sidecar") or {}).items():
        if not isinstance(value, list):
            raise ValidationError(f"{where}: sidecar column {key!r} must be a list")
        sidecar[key] = tuple(value)
    try:
        return QuintupletRecord(
            id=rec_id, cn_asr=cn_asr, cn_mt=cn_mt, align_src_tgt=align,
            sidecar=sidecar, **sents,
        )
    except ValidationError as e:
        raise ValidationError(f"{where}: {e}") from None


def record_to_json(rec: QuintupletRecord) -> dict:
    obj = {"id": rec.id}
    sidecar = dict(rec.sidecar)
    for name in SENTENCE_FIELDS:
        sent = rec.sentence(name)
        obj[name] = sent.text()
        if sent.has_annotations:
            sidecar[f"{name}_pos"] = tuple(t.pos for t in sent)
            sidecar[f"{name}_stem"] = tuple(t.stem for t in sent)
    if rec.cn_asr is not None:
        obj["cn_asr"] = _cn_to_json(rec.cn_asr)
    if rec.cn_mt is not None:
        obj["cn_mt"] = _cn_to_json(rec.cn_mt)
    if rec.align_src_tgt is not None:
        obj["align_src_tgt"] = format_pharaoh(rec.align_src_tgt)
    if sidecar:
        obj["sidecar"] = {k: list(v) for k, v in sidecar.items()}
    return obj


def read_corpus(path, format: str = "jsonl") -> list[QuintupletRecord]:
    """Read a quintuplet corpus; ``format`` is "jsonl" or "columns"."""
    path = Path(path)
    if format == "jsonl":
        return _read_corpus_jsonl(path)
    if format == "columns":
        return _read_corpus_columns(path)
    raise ValidationError(f"unknown corpus format {format!r}")


def _read_corpus_jsonl(path: Path) -> list[QuintupletRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"{where}: invalid JSON: {e}") from None
            if not isinstance(obj, dict):
                raise ValidationError(f"{where}: expected a JSON object")
            records.append(record_from_json(obj, where))
    return records


def _read_corpus_columns(path: Path) -> list[QuintupletRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 6:
                raise ValidationError(
                    f"{path.name}:{lineno}: expected 6 tab-separated fields "
                    f"(id + five sentences), got {len(fields)}"
                )
            obj = dict(zip(("id",) + SENTENCE_FIELDS, fields))
            records.append(record_from_json(obj, f"{path.name}:{lineno}"))
    return records


def write_corpus(records: Sequence[QuintupletRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


# --- confusion network text format ---------------------------------------


def read_confusion_networks(path) -> list[ConfusionNetwork]:
    """Read blank-line-separated confusion network blocks."""
    networks, slots = [], []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                if slots:
                    networks.append(ConfusionNetwork(tuple(slots)))
                    slots = []
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValidationError(f"line {lineno}: expected 'start dur word:p ...'")
            try:
                start, dur = float(parts[0]), float(parts[1])
                alts = []
                for item in parts[2:]:
                    word, p = item.rsplit(":", 1)
                    alts.append((word, float(p)))
            except ValueError:
                raise ValidationError(f"line {lineno}: malformed slot entry") from None
            try:
                slots.append(Slot(start, dur, tuple(alts)))
            except ValidationError as e:
                raise ValidationError(f"line {lineno}: {e}") from None
    if slots:
        networks.append(ConfusionNetwork(tuple(slots)))
    return networks


def write_confusion_networks(networks: Sequence[ConfusionNetwork], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for cn in networks:
            for slot in cn.slots:
                alts = " ".join(f"{w}:{p!r}" for w, p in slot.alternatives)
                f.write(f"{slot.start!r} {slot.duration!r} {alts}\n")
            f.write("\n")


def read_alignments(path) -> list[WordAlignment]:
    """One alignment per line; an empty line is an empty alignment."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            try:
                out.append(parse_pharaoh(line))
            except ValidationError as e:
                raise ValidationError(f"line {lineno}: {e}") from None
    return out


# --- feature dataset ------------------------------------------------------

_HEADER_TAG = "#columns"
_LABEL_MARK = "__label__"


def write_feature_table(
    table: FeatureTable,
    labels: Optional[Sequence[Label]] = None,
    path=None,
) -> None:
    """Write a tab-separated token-per-line dataset, label as last column."""
    if labels is not None and len(labels) != table.n_rows:
        raise ValidationError(
            f"{len(labels)} labels for {table.n_rows} rows"
        )
    header = [_HEADER_TAG] + [f"{name}:{kind}" for name, kind in table.columns]
    if labels is not None:
        header.append(_LABEL_MARK)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(header) + "\n")
        for start, end in table.sentence_spans():
            for r in range(start, end):
                cells = []
                for (name, kind), v in zip(table.columns, table.rows[r]):
                    if kind == NUMERIC:
                        cells.append(repr(float(v)))
                    else:
                        if "\t" in v or "\n" in v:
                            raise ValidationError(
                                f"column {name!r}, row {r}: value contains tab/newline"
                            )
                        cells.append(v)
                if labels is not None:
                    cells.append(labels[r].value)
                f.write("\t".join(cells) + "\n")
            f.write("\n")


def read_feature_table(path) -> tuple[FeatureTable, Optional[list[Label]]]:
    """Read a dataset written by :func:`write_feature_table`."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if not lines or not lines[0].startswith(_HEADER_TAG + "\t") and lines[0] != _HEADER_TAG:
        raise ValidationError("missing #columns header line")
    head = lines[0].split("\t")[1:]
    has_labels = bool(head) and head[-1] == _LABEL_MARK
    if has_labels:
        head = head[:-1]
    columns = []
    for spec in head:
        try:
            name, kind = spec.rsplit(":", 1)
        except ValueError:
            raise ValidationError(f"bad column spec {spec!r} in header") from None
        if kind not in (CATEGORICAL, NUMERIC):
            raise ValidationError(f"bad column kind in header spec {spec!r}")
        columns.append((name, kind))
    ncol = len(columns)
    rows: list[tuple] = []
    labels: list[Label] = []
    breaks: list[int] = []
    in_sentence = False
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            if in_sentence:
                breaks.append(len(rows))
                in_sentence = False
            continue
        cells = line.split("\t")
        expected = ncol + (1 if has_labels else 0)
        if len(cells) != expected:
            raise ValidationError(f"line {lineno}: {len(cells)} fields, expected {expected}")
        if has_labels:
            labels.append(Label.from_string(cells[-1]))
            cells = cells[:-1]
        row = []
        for (name, kind), cell in zip(columns, cells):
            if kind == NUMERIC:
                try:
                    row.append(float(cell))
                except ValueError:
                    raise ValidationError(
                        f"line {lineno}: bad numeric value {cell!r} in column {name!r}"
                    ) from None
            else:
                row.append(cell)
        rows.append(tuple(row))
        in_sentence = True
    if in_sentence:
        breaks.append(len(rows))
    table = FeatureTable(tuple(columns), tuple(rows), tuple(breaks))
    return table, (labels if has_labels else None)
