"""CRF numerics, checked against finite differences and exhaustive enumeration."""

import itertools
import math
import random

import numpy as np
import pytest

from wcekit.crf import (
    ConfidenceVector,
    CrfModel,
    TemplateSet,
    compile_dataset,
    decode,
    emission_scores,
    load_model,
    make_objective,
    marginals,
    save_model,
    train,
)
from wcekit.types import CATEGORICAL, NUMERIC, FeatureTable, Label, ValidationError


def random_table(rng, n_sentences=2, max_len=6, with_numeric=True):
    cols = [("w", CATEGORICAL), ("tag", CATEGORICAL)]
    if with_numeric:
        cols += [("score", NUMERIC)]
    rows, breaks = [], []
    for _ in range(n_sentences):
        for _ in range(rng.randint(1, max_len)):
            row = [rng.choice("abcde"), rng.choice("NVD")]
            if with_numeric:
                row.append(rng.uniform(-1, 1))
            rows.append(tuple(row))
        breaks.append(len(rows))
    return FeatureTable(tuple(cols), tuple(rows), tuple(breaks))


def random_labels(rng, table):
    return [rng.choice([Label.G, Label.B]) for _ in range(table.n_rows)]


def random_model(rng, table, scale=0.5) -> CrfModel:
    model = train(table, random_labels(rng, table), max_iters=0)
    model.weights = rng_normal(rng, model.weights.shape, scale)
    model.trans = rng_normal(rng, (2, 2), scale)
    return model


def rng_normal(rng, shape, scale):
    flat = np.asarray([rng.gauss(0, scale) for _ in range(int(np.prod(shape)))])
    return flat.reshape(shape)


def enumeration_marginals(E, T):
    """Brute-force posterior marginals over all 2^N label sequences."""
    n = len(E)
    weights = []
    for y in itertools.product((0, 1), repeat=n):
        s = sum(E[t][y[t]] for t in range(n))
        s += sum(T[y[t - 1]][y[t]] for t in range(1, n))
        weights.append((y, math.exp(s)))
    Z = sum(w for _, w in weights)
    marg = np.zeros((n, 2))
    for y, w in weights:
        for t, yt in enumerate(y):
            marg[t, yt] += w
    return marg / Z


class TestMarginals:
    def test_match_enumeration_on_random_models(self):
        rng = random.Random(101)
        for k in range(25):
            table = random_table(rng, n_sentences=1, max_len=12)
            model = random_model(rng, table)
            (E,) = emission_scores(model, table)
            (marg,) = marginals(model, table)
            brute = enumeration_marginals(E, model.trans)
            assert np.max(np.abs(marg - brute)) < 1e-8

    def test_rows_sum_to_one(self):
        rng = random.Random(7)
        for _ in range(10):
            table = random_table(rng, n_sentences=3)
            model = random_model(rng, table, scale=2.0)
            for marg in marginals(model, table):
                assert np.max(np.abs(marg.sum(axis=1) - 1.0)) < 1e-10

    def test_zero_weight_model_is_uniform(self):
        rng = random.Random(3)
        table = random_table(rng)
        model = train(table, random_labels(rng, table), max_iters=0)
        assert not model.weights.any() and not model.trans.any()
        for marg in marginals(model, table):
            assert np.all(marg == 0.5)

    def test_single_token_is_softmax_of_scores(self):
        rng = random.Random(9)
        table = random_table(rng, n_sentences=1, max_len=1)
        model = random_model(rng, table)
        (E,) = emission_scores(model, table)
        (marg,) = marginals(model, table)
        expected = np.exp(E[0]) / np.exp(E[0]).sum()
        assert np.allclose(marg[0], expected, atol=1e-12)

    def test_unknown_values_contribute_nothing(self):
        table = FeatureTable((("w", CATEGORICAL),), (("a",), ("b",)), (2,))
        model = train(table, [Label.G, Label.B], max_iters=50)
        unseen = FeatureTable((("w", CATEGORICAL),), (("zzz",),), (1,))
        # every feature of the unseen token is out of dictionary except the
        # boundary-window ones, so scores stay near uniform
        (marg,) = marginals(model, unseen)
        assert marg.shape == (1, 2)

    def test_missing_column_raises(self):
        rng = random.Random(5)
        table = random_table(rng)
        model = train(table, random_labels(rng, table), max_iters=0)
        other = FeatureTable((("other", CATEGORICAL),), (("x",),), (1,))
        with pytest.raises(ValidationError, match="column"):
            marginals(model, other)


class TestGradient:
    def test_analytic_gradient_matches_central_differences(self):
        rng = random.Random(77)
        step = 1e-5
        for problem in range(20):
            table = random_table(rng, n_sentences=1, max_len=5)
            labels = random_labels(rng, table)
            templates = TemplateSet.default_for(table)
            feature_index = {}
            compiled = compile_dataset(table, templates, feature_index, grow=True)
            spans = table.sentence_spans()
            label_ids = [
                np.asarray([0 if labels[r] is Label.G else 1 for r in range(s, e)])
                for s, e in spans
            ]
            fun = make_objective(compiled, label_ids, len(feature_index), 1.0, True)
            x = rng_normal(rng, (len(feature_index) * 2 + 4,), 0.5)
            _, grad = fun(x)
            worst = 0.0
            for i in range(len(x)):
                xp, xm = x.copy(), x.copy()
                xp[i] += step
                xm[i] -= step
                fd = (fun(xp)[0] - fun(xm)[0]) / (2 * step)
                rel = abs(grad[i] - fd) / max(abs(grad[i]), abs(fd), 1.0)
                worst = max(worst, rel)
            assert worst < 1e-4, f"problem {problem}: relative error {worst}"


class TestTraining:
    def separable_table(self, rng, n_sentences=20):
        rows, breaks, labels = [], [], []
        for _ in range(n_sentences):
            for _ in range(rng.randint(2, 6)):
                bad = rng.random() < 0.4
                rows.append(("is_bad_marker" if bad else "clean", rng.choice("xy")))
                labels.append(Label.B if bad else Label.G)
            breaks.append(len(rows))
        table = FeatureTable(
            (("marker", CATEGORICAL), ("noise", CATEGORICAL)),
            tuple(rows), tuple(breaks),
        )
        return table, labels

    def test_separable_data_is_fit_perfectly(self):
        from wcekit.evaluation import evaluate

        rng = random.Random(13)
        table, labels = self.separable_table(rng)
        model = train(table, labels, l2_sigma2=10.0, max_iters=200)
        predicted = [l for cv in decode(model, table) for l in cv.labels]
        report = evaluate(predicted, labels)
        assert report.mean_f == 1.0

    def test_objective_independent_of_initialization(self):
        rng = random.Random(21)
        table = random_table(rng, n_sentences=4)
        labels = random_labels(rng, table)
        m0 = train(table, labels, max_iters=500, tol=1e-12)
        x1 = rng_normal(rng, (m0.n_parameters(),), 1.0)
        m1 = train(table, labels, max_iters=500, tol=1e-12, init=x1)
        assert abs(m0.objective - m1.objective) < 1e-4

    def test_training_reports_metadata(self):
        rng = random.Random(2)
        table = random_table(rng)
        model = train(table, random_labels(rng, table), max_iters=100)
        assert model.iterations > 0
        assert math.isfinite(model.objective)
        assert model.grad_norm < 1.0

    def test_label_count_must_match(self):
        rng = random.Random(4)
        table = random_table(rng)
        with pytest.raises(ValidationError):
            train(table, [Label.G])

    def test_empty_table_rejected(self):
        with pytest.raises(ValidationError):
            train(FeatureTable((), (), ()), [])


class TestDecode:
    def test_threshold_zero_labels_everything_bad(self):
        rng = random.Random(31)
        table = random_table(rng)
        model = random_model(rng, table)
        for cv in decode(model, table, threshold=0.0):
            assert all(l is Label.B for l in cv.labels)

    def test_uniform_model_ties_to_bad_at_half(self):
        rng = random.Random(32)
        table = random_table(rng)
        model = train(table, random_labels(rng, table), max_iters=0)
        for cv in decode(model, table, threshold=0.5):
            assert all(l is Label.B for l in cv.labels)

    def test_bad_count_non_increasing_in_threshold(self):
        rng = random.Random(33)
        table = random_table(rng, n_sentences=3, max_len=8)
        model = random_model(rng, table, scale=1.5)
        grid = [k / 100.0 for k in range(101)]
        prev = None
        for t in grid:
            n_bad = sum(
                sum(1 for l in cv.labels if l is Label.B) for cv in decode(model, table, t)
            )
            if prev is not None:
                assert n_bad <= prev
            prev = n_bad


class TestSerialization:
    def test_round_trip_decodes_identically(self, tmp_path):
        rng = random.Random(55)
        table = random_table(rng, n_sentences=3)
        labels = random_labels(rng, table)
        model = train(table, labels, max_iters=60)
        path = tmp_path / "model.crf"
        save_model(model, path)
        back = load_model(path)
        assert back.feature_index == model.feature_index
        assert np.array_equal(back.weights, model.weights)
        assert np.array_equal(back.trans, model.trans)
        assert decode(back, table) == decode(model, table)

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "bogus"
        p.write_text("not a model\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            load_model(p)
