"""End-to-end wiring: reference labels per task, dataset assembly, and the
wrapper objective used by feature selection.

Tasks: ``asr`` labels the recognition hypothesis against the verbatim
transcript by minimum-edit alignment; ``mt`` and ``slt`` label the
respective translation hypotheses against the post-edition with the
shift-aware relaxed aligner.

Feature sets: ``asr`` (recognition features: raw for the asr task,
projected through the word alignment otherwise), ``mt`` (the 24
translation features), ``joint`` (both, concatenated column-wise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional, Sequence

from .align import MatchResources, TerConfig, align_ter_shift, align_wer, collapse_labels
from .asr_features import asr_feature_table, extract_asr_features
from .crf import CrfModel, decode, train
from .evaluation import evaluate, majority_baseline_mean_f
from .mt_features import FeatureConfig, extract_mt_features, mt_feature_table
from .ngram import BackoffLm
from .projection import project_asr_features
from .types import (
    FeatureTable,
    Label,
    QuintupletRecord,
    ValidationError,
    WordAlignment,
    concat_tables,
)

TASKS = ("asr", "mt", "slt")
FEATURE_SETS = ("asr", "mt", "joint")


@dataclass(frozen=True)
class LabelConfig:
    resources: MatchResources = field(default_factory=MatchResources.build)
    ter: TerConfig = field(default_factory=TerConfig)


def label_record(record: QuintupletRecord, task: str, cfg: LabelConfig = LabelConfig()):
    """Reference G/B labels for one record under the given task."""
    if task == "asr":
        _, labels, _ = align_wer(record.f_hyp, record.f_ref)
        return labels
    if task == "mt":
        _, types = align_ter_shift(record.e_hyp_mt, record.e_ref, cfg.resources, cfg.ter)
    elif task == "slt":
        _, types = align_ter_shift(record.e_hyp_slt, record.e_ref, cfg.resources, cfg.ter)
    else:
        raise ValidationError(f"unknown task {task!r}")
    return collapse_labels(types)


def _label_one(args):
    record, task, cfg = args
    return label_record(record, task, cfg)


def label_corpus(
    records: Sequence[QuintupletRecord],
    task: str,
    cfg: LabelConfig = LabelConfig(),
    jobs: int = 1,
) -> list[list[Label]]:
    if jobs > 1:
        with Pool(jobs) as pool:
            return pool.map(_label_one, [(r, task, cfg) for r in records])
    return [label_record(r, task, cfg) for r in records]


@dataclass(frozen=True)
class ExtractConfig:
    feature_set: str = "joint"
    mt: FeatureConfig = field(default_factory=FeatureConfig)
    strategy: str = "joint1"

    def __post_init__(self):
        if self.feature_set not in FEATURE_SETS:
            raise ValidationError(f"unknown feature set {self.feature_set!r}")


def target_field_for_task(task: str) -> str:
    if task == "asr":
        return "f_hyp"
    if task == "mt":
        return "e_hyp_mt"
    if task == "slt":
        return "e_hyp_slt"
    raise ValidationError(f"unknown task {task!r}")


def record_table(
    record: QuintupletRecord,
    task: str,
    cfg: ExtractConfig,
    lms: tuple[Optional[BackoffLm], Optional[BackoffLm]],
) -> FeatureTable:
    """Feature table for one record (one sentence)."""
    src_lm, _ = lms
    target = record.sentence(target_field_for_task(task))
    parts = []
    if cfg.feature_set in ("mt", "joint"):
        if task == "asr":
            raise ValidationError("translation features are undefined for the asr task")
        vectors = extract_mt_features(record, target, cfg.mt, lms)
        parts.append(mt_feature_table([vectors], cfg.mt))
    if cfg.feature_set in ("asr", "joint"):
        if record.cn_asr is None:
            raise ValidationError(f"record {record.id}: recognition features need cn_asr")
        if src_lm is None:
            raise ValidationError("recognition features need a source language model")
        src_feats = extract_asr_features(record.f_hyp, record.cn_asr, src_lm)
        if task == "asr":
            parts.append(asr_feature_table([src_feats]))
        else:
            align = record.align_src_tgt or WordAlignment(frozenset())
            projected = project_asr_features(
                target, align, src_feats, cfg.strategy,
                lm_order=src_lm.order, floor_log10=src_lm.floor_log10,
            )
            parts.append(asr_feature_table([projected]))
    return merge_columns(parts)


def merge_columns(tables: Sequence[FeatureTable]) -> FeatureTable:
    """Column-wise concatenation of tables over the same tokens."""
    if not tables:
        raise ValidationError("nothing to merge")
    if len(tables) == 1:
        return tables[0]
    first = tables[0]
    for t in tables[1:]:
        if t.sentence_breaks != first.sentence_breaks or t.n_rows != first.n_rows:
            raise ValidationError("cannot merge tables over different token sets")
    columns = tuple(c for t in tables for c in t.columns)
    rows = tuple(
        tuple(v for t in tables for v in t.rows[r]) for r in range(first.n_rows)
    )
    return FeatureTable(columns, rows, first.sentence_breaks)


def _table_one(args):
    record, task, cfg, lms = args
    return record_table(record, task, cfg, lms)


def build_dataset(
    records: Sequence[QuintupletRecord],
    task: str,
    cfg: ExtractConfig,
    lms: tuple[Optional[BackoffLm], Optional[BackoffLm]],
    jobs: int = 1,
) -> FeatureTable:
    if jobs > 1:
        with Pool(jobs) as pool:
            tables = pool.map(_table_one, [(r, task, cfg, lms) for r in records])
    else:
        tables = [record_table(r, task, cfg, lms) for r in records]
    return concat_tables(tables)


def flatten(label_lists: Sequence[Sequence[Label]]) -> list[Label]:
    return [l for labels in label_lists for l in labels]


def make_wrapper_objective(
    train_table: FeatureTable,
    train_labels: Sequence[Label],
    sel_table: FeatureTable,
    sel_labels: Sequence[Label],
    l2_sigma2: float = 1.0,
    max_iters: int = 60,
    tol: float = 1e-5,
    threshold: float = 0.5,
):
    """Selection objective: retrain on the kept columns, score mean F on the
    selection split.  The empty subset scores as the majority-class
    constant predictor."""
    order = train_table.column_names()

    def objective(subset: frozenset) -> float:
        if not subset:
            return majority_baseline_mean_f(sel_labels)
        names = [c for c in order if c in subset]
        model = train(
            train_table.select_columns(names), train_labels,
            l2_sigma2=l2_sigma2, max_iters=max_iters, tol=tol,
        )
        predicted = [
            l for cv in decode(model, sel_table.select_columns(names), threshold)
            for l in cv.labels
        ]
        return evaluate(predicted, sel_labels).mean_f

    return objective
