"""Linear-chain conditional random field over the two quality labels.

Observation features come from window templates over feature-table columns:
categorical cells become indicator features keyed by (column, offset, value),
numeric cells become real-valued features keyed by (column, offset) whose
contribution is weight * value.  A label-bigram transition matrix (with no
observation conjunction) ties the chain together.

Training maximizes the L2-penalized conditional log-likelihood with L-BFGS;
the objective is concave, so any start point reaches the same optimum.
Inference computes per-token marginals with log-domain forward-backward and
labels tokens by thresholding the bad-label posterior (ties go to bad).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .types import CATEGORICAL, FeatureTable, Label, NumericError, ValidationError

LABELS = (Label.G, Label.B)
G, B = 0, 1

BOS_VALUE = "__BOS__"
EOS_VALUE = "__EOS__"

WINDOW = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class TemplateSet:
    """Unigram observation templates (column, offsets, kind) plus the
    transition toggle."""

    unigram: tuple[tuple[str, tuple[int, ...], str], ...]
    transitions: bool = True

    def __post_init__(self):
        for column, offsets, kind in self.unigram:
            if any(d < -2 or d > 2 for d in offsets):
                raise ValidationError(f"template {column!r}: offsets must lie in [-2, 2]")

    @classmethod
    def default_for(cls, table: FeatureTable) -> "TemplateSet":
        """Window templates at offsets -2..2 for every column."""
        return cls(tuple((name, WINDOW, kind) for name, kind in table.columns))


@dataclass
class CrfModel:
    templates: TemplateSet
    feature_index: dict[str, int]
    weights: np.ndarray  # (n_features, 2)
    trans: np.ndarray  # (2, 2), [previous, current]
    l2_sigma2: float
    iterations: int = 0
    objective: float = 0.0
    grad_norm: float = 0.0

    def n_parameters(self) -> int:
        return self.weights.size + (self.trans.size if self.templates.transitions else 0)


@dataclass(frozen=True)
class ConfidenceVector:
    """Per-token good-label posteriors and thresholded labels."""

    p_good: tuple[float, ...]
    labels: tuple[Label, ...]
    threshold: float


def _column_indices(table: FeatureTable, templates: TemplateSet) -> dict[str, int]:
    out = {}
    for column, _, _ in templates.unigram:
        out[column] = table.column_index(column)
    return out


def _expand_sentence(table, start, end, templates, col_idx, feature_index, grow):
    """Per-position (indices, values) feature activations for one sentence."""
    positions = []
    for t in range(start, end):
        idxs: list[int] = []
        vals: list[float] = []
        for column, offsets, kind in templates.unigram:
            ci = col_idx[column]
            for d in offsets:
                p = t + d
                if kind == CATEGORICAL:
                    if p < start:
                        value = BOS_VALUE
                    elif p >= end:
                        value = EOS_VALUE
                    else:
                        value = table.rows[p][ci]
                    key = f"u|{column}|{d}|{value}"
                    x = 1.0
                else:
                    if p < start or p >= end:
                        continue
                    key = f"n|{column}|{d}"
                    x = float(table.rows[p][ci])
                fi = feature_index.get(key)
                if fi is None:
                    if not grow:
                        continue
                    fi = len(feature_index)
                    feature_index[key] = fi
                idxs.append(fi)
                vals.append(x)
        positions.append((np.asarray(idxs, dtype=np.intp), np.asarray(vals, dtype=np.float64)))
    return positions


def compile_dataset(
    table: FeatureTable,
    templates: TemplateSet,
    feature_index: dict[str, int],
    grow: bool,
) -> list[list[tuple[np.ndarray, np.ndarray]]]:
    try:
        col_idx = _column_indices(table, templates)
    except KeyError as e:
        raise ValidationError(f"table lacks column {e.args[0]!r} required by the model") from None
    return [
        _expand_sentence(table, s, e, templates, col_idx, feature_index, grow)
        for s, e in table.sentence_spans()
    ]


def _emissions(positions, weights: np.ndarray) -> np.ndarray:
    E = np.zeros((len(positions), 2))
    for t, (idxs, vals) in enumerate(positions):
        if len(idxs):
            E[t] = vals @ weights[idxs]
    return E


def _forward_backward(E: np.ndarray, T: np.ndarray):
    """Log-domain forward/backward; returns (alpha, beta, logZ)."""
    n = len(E)
    alpha = np.empty((n, 2))
    beta = np.zeros((n, 2))
    alpha[0] = E[0]
    for t in range(1, n):
        m = alpha[t - 1][:, None] + T
        alpha[t] = np.logaddexp(m[0], m[1]) + E[t]
    for t in range(n - 2, -1, -1):
        m = T + E[t + 1][None, :] + beta[t + 1][None, :]
        beta[t] = np.logaddexp(m[:, 0], m[:, 1])
    logZ = float(np.logaddexp(alpha[-1, 0], alpha[-1, 1]))
    return alpha, beta, logZ


def make_objective(
    compiled: Sequence[list],
    label_ids: Sequence[np.ndarray],
    n_features: int,
    l2_sigma2: float,
    use_transitions: bool,
):
    """Negative penalized log-likelihood and its gradient over packed weights.

    The packed vector is the (n_features, 2) emission weight matrix raveled,
    followed by the raveled 2x2 transition matrix when transitions are on.
    """

    n_w = n_features * 2

    def fun(packed: np.ndarray):
        W = packed[:n_w].reshape(n_features, 2)
        T = packed[n_w:].reshape(2, 2) if use_transitions else np.zeros((2, 2))
        gradW = np.zeros_like(W)
        gradT = np.zeros((2, 2))
        ll = 0.0
        for positions, ys in zip(compiled, label_ids):
            E = _emissions(positions, W)
            alpha, beta, logZ = _forward_backward(E, T)
            marg = np.exp(alpha + beta - logZ)
            ll += float(E[np.arange(len(ys)), ys].sum()) - logZ
            for t, (idxs, vals) in enumerate(positions):
                if not len(idxs):
                    continue
                diff = -marg[t]
                diff[ys[t]] += 1.0
                np.add.at(gradW, idxs, vals[:, None] * diff[None, :])
            if use_transitions and len(ys) > 1:
                for t in range(1, len(ys)):
                    ll += float(T[ys[t - 1], ys[t]])
                    pair = np.exp(
                        alpha[t - 1][:, None] + T + E[t][None, :] + beta[t][None, :] - logZ
                    )
                    gradT -= pair
                    gradT[ys[t - 1], ys[t]] += 1.0
        penalty = (float(np.sum(W * W)) + float(np.sum(T * T))) / (2.0 * l2_sigma2)
        ll -= penalty
        gradW -= W / l2_sigma2
        grad = gradW.ravel()
        if use_transitions:
            gradT -= T / l2_sigma2
            grad = np.concatenate([grad, gradT.ravel()])
        if not math.isfinite(ll):
            raise NumericError("non-finite objective during CRF training")
        return -ll, -grad

    return fun


def train(
    table: FeatureTable,
    labels: Sequence[Label],
    templates: Optional[TemplateSet] = None,
    l2_sigma2: float = 1.0,
    max_iters: int = 200,
    tol: float = 1e-5,
    init: Optional[np.ndarray] = None,
) -> CrfModel:
    """Fit the CRF on a fully labeled feature table (one or more sentences)."""
    if table.n_sentences < 1:
        raise ValidationError("training needs at least one sentence")
    if labels is None or len(labels) != table.n_rows:
        raise ValidationError(
            f"training needs one label per row ({0 if labels is None else len(labels)} "
            f"labels for {table.n_rows} rows)"
        )
    if l2_sigma2 <= 0:
        raise ValidationError("l2_sigma2 must be positive")
    templates = templates if templates is not None else TemplateSet.default_for(table)
    feature_index: dict[str, int] = {}
    compiled = compile_dataset(table, templates, feature_index, grow=True)
    label_ids = [
        np.asarray([G if labels[r] is Label.G else B for r in range(s, e)], dtype=np.intp)
        for s, e in table.sentence_spans()
    ]
    n_features = len(feature_index)
    n_params = n_features * 2 + (4 if templates.transitions else 0)
    objective = make_objective(compiled, label_ids, n_features, l2_sigma2, templates.transitions)

    x0 = np.zeros(n_params) if init is None else np.asarray(init, dtype=np.float64)
    if x0.shape != (n_params,):
        raise ValidationError(f"initial weights must have {n_params} entries")
    if max_iters == 0:
        neg_ll, neg_grad = objective(x0)
        x, nit, obj, gnorm = x0, 0, -neg_ll, float(np.linalg.norm(neg_grad))
    else:
        res = minimize(
            objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iters, "ftol": tol, "gtol": 1e-10},
        )
        x, nit, obj, gnorm = res.x, res.nit, -float(res.fun), float(np.linalg.norm(res.jac))
    W = x[: n_features * 2].reshape(n_features, 2).copy()
    T = x[n_features * 2:].reshape(2, 2).copy() if templates.transitions else np.zeros((2, 2))
    return CrfModel(
        templates=templates,
        feature_index=feature_index,
        weights=W,
        trans=T,
        l2_sigma2=l2_sigma2,
        iterations=int(nit),
        objective=obj,
        grad_norm=gnorm,
    )


def emission_scores(model: CrfModel, table: FeatureTable) -> list[np.ndarray]:
    """Per-sentence (length, 2) emission score matrices under the model."""
    compiled = compile_dataset(table, model.templates, model.feature_index, grow=False)
    return [_emissions(positions, model.weights) for positions in compiled]


def marginals(model: CrfModel, table: FeatureTable) -> list[np.ndarray]:
    """Per-sentence (length, 2) posterior label distributions.

    Unknown categorical values activate no feature and contribute zero
    score, so out-of-vocabulary material decodes to the uniform prior.
    """
    T = model.trans if model.templates.transitions else np.zeros((2, 2))
    out = []
    for E in emission_scores(model, table):
        alpha, beta, logZ = _forward_backward(E, T)
        out.append(np.exp(alpha + beta - logZ))
    return out


def decode(model: CrfModel, table: FeatureTable, threshold: float = 0.5) -> list[ConfidenceVector]:
    """Posterior decoding: label B wherever p_bad >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold {threshold} outside [0,1]")
    out = []
    for marg in marginals(model, table):
        p_good = tuple(float(p) for p in marg[:, G])
        labs = tuple(Label.B if (1.0 - p) >= threshold else Label.G for p in p_good)
        out.append(ConfidenceVector(p_good, labs, threshold))
    return out


# --- model serialization ----------------------------------------------------

MODEL_HEADER = "WCE-CRF v1"


def save_model(model: CrfModel, path) -> None:
    """Text serialization; weights as shortest round-tripping decimals."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(MODEL_HEADER + "\n")
        f.write(f"l2_sigma2\t{model.l2_sigma2!r}\n")
        f.write(f"iterations\t{model.iterations}\n")
        f.write(f"objective\t{model.objective!r}\n")
        f.write(f"grad_norm\t{model.grad_norm!r}\n")
        f.write(f"templates\t{len(model.templates.unigram)}\n")
        for column, offsets, kind in model.templates.unigram:
            f.write(f"t\t{column}\t{kind}\t{','.join(map(str, offsets))}\n")
        f.write(f"transitions\t{int(model.templates.transitions)}\n")
        f.write(f"features\t{len(model.feature_index)}\n")
        for key, idx in model.feature_index.items():
            f.write(f"{idx}\t{key}\n")
        f.write("weights\n")
        for wg, wb in model.weights:
            f.write(f"{float(wg)!r}\t{float(wb)!r}\n")
        f.write("trans\n")
        f.write("\t".join(repr(float(x)) for x in model.trans.ravel()) + "\n")
        f.write("end\n")


def load_model(path) -> CrfModel:
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if not lines or lines[0] != MODEL_HEADER:
        raise ValidationError(f"not a {MODEL_HEADER} model file")
    pos = 1

    def take(prefix):
        nonlocal pos
        parts = lines[pos].split("\t")
        if parts[0] != prefix:
            raise ValidationError(f"model file line {pos + 1}: expected {prefix!r}")
        pos += 1
        return parts[1:]

    l2_sigma2 = float(take("l2_sigma2")[0])
    iterations = int(take("iterations")[0])
    objective = float(take("objective")[0])
    grad_norm = float(take("grad_norm")[0])
    n_templates = int(take("templates")[0])
    unigram = []
    for _ in range(n_templates):
        column, kind, offsets = take("t")
        unigram.append((column, tuple(int(d) for d in offsets.split(",")), kind))
    transitions = bool(int(take("transitions")[0]))
    n_features = int(take("features")[0])
    feature_index: dict[str, int] = {}
    for _ in range(n_features):
        parts = lines[pos].split("\t", 1)
        pos += 1
        if len(parts) != 2:
            raise ValidationError(f"model file line {pos}: bad feature entry")
        feature_index[parts[1]] = int(parts[0])
    if lines[pos] != "weights":
        raise ValidationError("model file: missing weights block")
    pos += 1
    weights = np.zeros((n_features, 2))
    for i in range(n_features):
        wg, wb = lines[pos].split("\t")
        weights[i] = (float(wg), float(wb))
        pos += 1
    if lines[pos] != "trans":
        raise ValidationError("model file: missing transition block")
    pos += 1
    trans = np.asarray([float(x) for x in lines[pos].split("\t")]).reshape(2, 2)
    pos += 1
    if lines[pos] != "end":
        raise ValidationError("model file: missing end marker")
    return CrfModel(
        templates=TemplateSet(tuple(unigram), transitions),
        feature_index=feature_index,
        weights=weights,
        trans=trans,
        l2_sigma2=l2_sigma2,
        iterations=iterations,
        objective=objective,
        grad_norm=grad_norm,
    )
