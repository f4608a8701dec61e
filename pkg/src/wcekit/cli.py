"""Command-line front end wiring the pipeline together.

Subcommands: label, extract, train, predict, evaluate, sweep, fuse, select,
rescore, stats.  Options may come from a flat ``key = value`` config file
(``--config``); explicit flags win over config values.  Results go to
stdout or ``--out`` as JSON (the sweep emits CSV, its documented format).

Exit codes: 0 success, 1 usage, 2 data/config validation, 3 numeric
failure.  ``WCE_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .align import MatchResources, load_paraphrases, load_synonyms
from .corpus import read_corpus, read_feature_table, write_feature_table
from .crf import decode, load_model, save_model, train
from .evaluation import (
    evaluate,
    label_stats,
    labels_from_threshold,
    sweep,
    sweep_csv,
)
from .fusion import FusionConfig, combine_posteriors
from .lattice import read_lattice, rescore
from .mt_features import FeatureConfig, MT_FEATURE_NAMES, load_polysemy, load_stoplist
from .ngram import load_arpa
from .pipeline import (
    ExtractConfig,
    LabelConfig,
    build_dataset,
    label_corpus,
    make_wrapper_objective,
)
from .selection import sbs
from .types import Label, NumericError, ValidationError

log = logging.getLogger("wcekit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_config(path) -> dict:
    """Flat ``key = value`` file; quoted strings, numbers, booleans, comments."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if value.startswith("#"):
                raise ValidationError(f"{path}:{lineno}: missing value")
            if not (value.startswith('"') or value.startswith("'")):
                value = value.split("#", 1)[0].strip()
            out[key] = _parse_value(value, path, lineno)
    return out


def _parse_value(value: str, path, lineno):
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value == "":
        raise ValidationError(f"{path}:{lineno}: missing value")
    return value


def _apply_config(args: argparse.Namespace, config: dict):
    for key, value in config.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def _emit(payload, out_path, as_text=False):
    text = payload if as_text else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _label_config(args) -> LabelConfig:
    synonyms = load_synonyms(args.synonyms) if args.synonyms else ()
    paraphrases = load_paraphrases(args.paraphrases) if args.paraphrases else ()
    stem_source = "disabled" if getattr(args, "no_stem_match", False) else "token-stem-column"
    return LabelConfig(MatchResources.build(synonyms, paraphrases, stem_source))


def _load_lms(args):
    src = load_arpa(args.src_lm) if getattr(args, "src_lm", None) else None
    tgt = load_arpa(args.tgt_lm) if getattr(args, "tgt_lm", None) else None
    return src, tgt


def _feature_config(args) -> FeatureConfig:
    if args.features:
        names = [n.strip() for n in str(args.features).split(",") if n.strip()]
        enabled = frozenset(names)
    else:
        enabled = frozenset(MT_FEATURE_NAMES)
    stoplist = load_stoplist(args.stoplist) if args.stoplist else frozenset()
    polysemy = load_polysemy(args.polysemy) if args.polysemy else None
    return FeatureConfig(enabled, stoplist, polysemy)


def _read_labels_file(path) -> list[Label]:
    """Flat label list from a labels/predictions JSON or a labeled dataset."""
    text = Path(path).read_text(encoding="utf-8")
    if text.startswith("#columns"):
        _, labels = read_feature_table(path)
        if labels is None:
            raise ValidationError(f"{path}: dataset has no label column")
        return labels
    obj = json.loads(text)
    groups = obj.get("records") or obj.get("sentences")
    if not isinstance(groups, list):
        raise ValidationError(f"{path}: expected 'records' or 'sentences' with labels")
    out = []
    for g in groups:
        for l in g["labels"]:
            out.append(Label.from_string(l))
    return out


def _read_predictions_file(path) -> list[list[float]]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    sentences = obj.get("sentences")
    if not isinstance(sentences, list):
        raise ValidationError(f"{path}: expected a predictions file with 'sentences'")
    return [[float(p) for p in s["p_good"]] for s in sentences]


def parse_grid(spec) -> list[float]:
    if spec is None:
        return [k / 100.0 for k in range(101)]
    if isinstance(spec, str) and "," in spec:
        return [float(x) for x in spec.split(",")]
    try:
        n = int(spec)
    except (TypeError, ValueError):
        return [float(spec)]
    if n < 2:
        raise ValidationError("grid needs at least 2 points")
    return [k / (n - 1) for k in range(n)]


# --- subcommand handlers ----------------------------------------------------


def cmd_label(args):
    records = read_corpus(args.corpus, args.corpus_format or "jsonl")
    cfg = _label_config(args)
    labels = label_corpus(records, args.task, cfg, jobs=args.jobs or 1)
    payload = {
        "task": args.task,
        "records": [
            {"id": r.id, "labels": [l.value for l in ls]}
            for r, ls in zip(records, labels)
        ],
    }
    _emit(payload, args.out)


def cmd_extract(args):
    records = read_corpus(args.corpus, args.corpus_format or "jsonl")
    lms = _load_lms(args)
    cfg = ExtractConfig(
        feature_set=args.feature_set or "joint",
        mt=_feature_config(args),
        strategy=args.strategy or "joint1",
    )
    table = build_dataset(records, args.task, cfg, lms, jobs=args.jobs or 1)
    labels = None
    if args.with_labels:
        label_lists = label_corpus(records, args.task, _label_config(args), jobs=args.jobs or 1)
        labels = [l for ls in label_lists for l in ls]
    write_feature_table(table, labels, args.table_out)
    _emit(
        {
            "table": str(args.table_out),
            "rows": table.n_rows,
            "sentences": table.n_sentences,
            "columns": table.column_names(),
            "labeled": labels is not None,
        },
        args.out,
    )


def cmd_train(args):
    table, labels = read_feature_table(args.data)
    if labels is None:
        raise ValidationError(f"{args.data}: training needs a label column")
    model = train(
        table,
        labels,
        l2_sigma2=args.l2_sigma2 if args.l2_sigma2 is not None else 1.0,
        max_iters=args.max_iters if args.max_iters is not None else 200,
        tol=args.tol if args.tol is not None else 1e-5,
    )
    save_model(model, args.model)
    _emit(
        {
            "model": str(args.model),
            "n_features": len(model.feature_index),
            "iterations": model.iterations,
            "objective": model.objective,
            "grad_norm": model.grad_norm,
        },
        args.out,
    )


def _threshold(args) -> float:
    return args.threshold if args.threshold is not None else 0.5


def cmd_predict(args):
    table, _ = read_feature_table(args.data)
    model = load_model(args.model)
    results = decode(model, table, _threshold(args))
    payload = {
        "threshold": _threshold(args),
        "sentences": [
            {"p_good": list(cv.p_good), "labels": [l.value for l in cv.labels]}
            for cv in results
        ],
    }
    _emit(payload, args.out)


def cmd_evaluate(args):
    pred = _read_labels_file(args.pred)
    gold = _read_labels_file(args.gold)
    _emit(evaluate(pred, gold).as_dict(), args.out)


def cmd_sweep(args):
    p_good = [p for s in _read_predictions_file(args.pred) for p in s]
    gold = _read_labels_file(args.gold)
    points = sweep(p_good, gold, parse_grid(args.grid))
    _emit(sweep_csv(points), args.out, as_text=True)


def cmd_fuse(args):
    asr = _read_predictions_file(args.asr)
    mt = _read_predictions_file(args.mt)
    if [len(s) for s in asr] != [len(s) for s in mt]:
        raise ValidationError("fusion inputs have different sentence shapes")
    cfg = FusionConfig(args.alpha if args.alpha is not None else 0.5)
    t = _threshold(args)
    sentences = []
    for pa, pm in zip(asr, mt):
        fused = combine_posteriors(pa, pm, cfg)
        sentences.append({
            "p_good": fused,
            "labels": [l.value for l in labels_from_threshold(fused, t)],
        })
    _emit({"alpha": cfg.alpha, "threshold": t, "sentences": sentences}, args.out)


def cmd_select(args):
    train_table, train_labels = read_feature_table(args.train_data)
    sel_table, sel_labels = read_feature_table(args.select_data)
    if train_labels is None or sel_labels is None:
        raise ValidationError("selection needs labeled train and selection datasets")
    objective = make_wrapper_objective(
        train_table, train_labels, sel_table, sel_labels,
        l2_sigma2=args.l2_sigma2 if args.l2_sigma2 is not None else 1.0,
        max_iters=args.max_iters if args.max_iters is not None else 60,
        tol=args.tol if args.tol is not None else 1e-5,
        threshold=_threshold(args),
    )
    features = args.features_list or train_table.column_names()
    result = sbs(features, objective)
    if args.curve_csv:
        lines = ["n_features,mean_f"] + [f"{k},{mf!r}" for k, mf in result.curve]
        Path(args.curve_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(result.as_dict(), args.out)


def cmd_rescore(args):
    lat = read_lattice(args.lattice)
    conf_raw = json.loads(Path(args.confidence).read_text(encoding="utf-8"))
    if not isinstance(conf_raw, dict):
        raise ValidationError("confidence file must be a JSON object of word -> G/B/p_good")
    confidence = {}
    for word, value in conf_raw.items():
        if isinstance(value, str):
            confidence[word] = Label.from_string(value)
        else:
            confidence[word] = float(value)
    words, cost = rescore(
        lat,
        confidence,
        reward=args.reward if args.reward is not None else 0.0,
        penalty=args.penalty if args.penalty is not None else 0.0,
    )
    _emit({"words": words, "cost": cost}, args.out)


def cmd_stats(args):
    labels = _read_labels_file(args.labels)
    _emit(label_stats(labels), args.out)


# --- argument wiring ---------------------------------------------------------


def build_parser() -> _Parser:
    ap = _Parser(prog="wcekit", description=__doc__,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="flat key = value config file")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, *flags):
        p = sub.add_parser(name)
        p.set_defaults(handler=fn)
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--jobs", type=int, help="per-sentence parallelism (default 1)")
        for flag, kw in flags:
            p.add_argument(flag, **kw)
        return p

    corpus_flags = [
        ("--corpus", dict(help="quintuplet corpus path")),
        ("--corpus-format", dict(choices=("jsonl", "columns"))),
        ("--task", dict(choices=("asr", "mt", "slt"))),
    ]
    resource_flags = [
        ("--synonyms", dict(help="synonym pair file")),
        ("--paraphrases", dict(help="paraphrase table file")),
        ("--no-stem-match", dict(action="store_true", default=None)),
    ]
    add("label", cmd_label, *corpus_flags, *resource_flags)
    add(
        "extract", cmd_extract, *corpus_flags, *resource_flags,
        ("--feature-set", dict(choices=("asr", "mt", "joint"))),
        ("--features", dict(help="comma list of translation features to enable")),
        ("--strategy", dict(choices=("joint1", "joint2", "joint3"))),
        ("--src-lm", dict(help="source ARPA model")),
        ("--tgt-lm", dict(help="target ARPA model")),
        ("--stoplist", dict()),
        ("--polysemy", dict(help="word<TAB>count lexicon")),
        ("--with-labels", dict(action="store_true", default=None)),
        ("--table-out", dict(required=True, help="dataset file to write")),
    )
    add(
        "train", cmd_train,
        ("--data", dict(required=True, help="labeled dataset")),
        ("--model", dict(required=True, help="model file to write")),
        ("--l2-sigma2", dict(type=float)),
        ("--max-iters", dict(type=int)),
        ("--tol", dict(type=float)),
    )
    add(
        "predict", cmd_predict,
        ("--data", dict(required=True)),
        ("--model", dict(required=True)),
        ("--threshold", dict(type=float)),
    )
    add(
        "evaluate", cmd_evaluate,
        ("--pred", dict(required=True, help="labels/predictions JSON or labeled dataset")),
        ("--gold", dict(required=True)),
    )
    add(
        "sweep", cmd_sweep,
        ("--pred", dict(required=True, help="predictions JSON with p_good")),
        ("--gold", dict(required=True)),
        ("--grid", dict(help="point count or comma list of thresholds")),
    )
    add(
        "fuse", cmd_fuse,
        ("--asr", dict(required=True, help="recognition-side predictions JSON")),
        ("--mt", dict(required=True, help="translation-side predictions JSON")),
        ("--alpha", dict(type=float)),
        ("--threshold", dict(type=float)),
    )
    add(
        "select", cmd_select,
        ("--train-data", dict(required=True)),
        ("--select-data", dict(required=True)),
        ("--features-list", dict(nargs="+", help="columns to select over (default: all)")),
        ("--l2-sigma2", dict(type=float)),
        ("--max-iters", dict(type=int)),
        ("--tol", dict(type=float)),
        ("--threshold", dict(type=float)),
        ("--curve-csv", dict(help="also write the selection curve as CSV")),
    )
    add(
        "rescore", cmd_rescore,
        ("--lattice", dict(required=True)),
        ("--confidence", dict(required=True, help="JSON object word -> G/B/p_good")),
        ("--reward", dict(type=float)),
        ("--penalty", dict(type=float)),
    )
    add("stats", cmd_stats, ("--labels", dict(required=True)))
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("WCE_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(args, parse_config(args.config))
        missing = [k for k in ("corpus", "task") if hasattr(args, k) and getattr(args, k) is None]
        if missing:
            raise UsageError(f"missing required option(s): {', '.join('--' + m for m in missing)}")
        log.info("running %s", args.command)
        args.handler(args)
        return 0
    except UsageError as e:
        _report_error("usage", e)
        return 1
    except (ValidationError, FileNotFoundError, json.JSONDecodeError, KeyError) as e:
        _report_error("validation", e)
        return 2
    except (NumericError, ArithmeticError) as e:
        _report_error("numeric", e)
        return 3


def _report_error(kind, exc):
    message = str(exc) or exc.__class__.__name__
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.stderr.write(f"wcekit: {kind} error: {message}\n")


if __name__ == "__main__":
    sys.exit(main())
