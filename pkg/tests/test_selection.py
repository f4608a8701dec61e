"""Sequential backward selection tests, including the planted-feature oracle."""

import random

import pytest

from wcekit.selection import ObjectiveError, SbsResult, sbs
from wcekit.types import CATEGORICAL, FeatureTable, Label
from wcekit.pipeline import make_wrapper_objective


class CountingObjective:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, subset):
        self.calls += 1
        return self.fn(subset)


class TestLoopShape:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_objective_call_count_is_triangular(self, n):
        features = [f"f{i}" for i in range(n)]
        obj = CountingObjective(lambda s: len(s) * 0.1)
        result = sbs(features, obj)
        assert obj.calls == n * (n + 1) // 2
        assert sorted(result.removal_order) == sorted(features)

    def test_single_feature(self):
        obj = CountingObjective(lambda s: 0.4)
        result = sbs(["only"], obj)
        assert obj.calls == 1
        assert result.removal_order == ("only",)
        assert result.curve == ((0, 0.4),)

    def test_curve_covers_every_size(self):
        result = sbs(["a", "b", "c"], lambda s: len(s) * 0.1)
        assert [k for k, _ in result.curve] == [2, 1, 0]

    def test_removal_order_is_permutation_under_random_objectives(self):
        rng = random.Random(9)
        for _ in range(20):
            names = [f"c{i}" for i in range(rng.randint(1, 7))]
            values = {}

            def obj(subset):
                key = frozenset(subset)
                if key not in values:
                    values[key] = rng.random()
                return values[key]

            result = sbs(names, obj)
            assert sorted(result.removal_order) == sorted(names)

    def test_rank_one_is_last_removed(self):
        # dropping "keep" always hurts, so it survives to the end
        def obj(subset):
            return 0.9 if "keep" in subset else 0.1

        result = sbs(["keep", "x", "y"], obj)
        assert result.removal_order[-1] == "keep"
        assert result.ranks["keep"] == 1

    def test_ties_remove_lexicographically_smallest(self):
        result = sbs(["b", "a", "c"], lambda s: 0.5)
        assert result.removal_order == ("a", "b", "c")

    def test_all_zero_round_removes_smallest(self):
        result = sbs(["z", "m", "a"], lambda s: 0.0)
        assert result.removal_order == ("a", "m", "z")

    def test_best_subset_tracks_maximum(self):
        def obj(subset):
            return 1.0 if subset == frozenset({"a", "c"}) else 0.2

        result = sbs(["a", "b", "c"], obj)
        assert result.best_subset == frozenset({"a", "c"})
        assert result.best_score == 1.0

    def test_objective_failure_carries_subset(self):
        def obj(subset):
            if "bomb" not in subset:
                raise RuntimeError("boom")
            return 0.5

        with pytest.raises(ObjectiveError) as err:
            sbs(["bomb", "x"], obj)
        assert isinstance(err.value.subset, frozenset)

    def test_deterministic(self):
        def obj(subset):
            return sum(hash(x) % 97 for x in subset) / 1000.0

        assert sbs(["a", "b", "c", "d"], obj) == sbs(["a", "b", "c", "d"], obj)


def planted_tables(rng, n_train=30, n_dev=20):
    """Train/dev tables where `signal` predicts the label and `noise` is random."""

    def build(n):
        rows, breaks, labels = [], [], []
        for _ in range(n):
            for _ in range(rng.randint(2, 5)):
                bad = rng.random() < 0.4
                rows.append((
                    "neg" if bad else "pos",
                    rng.choice(["r1", "r2", "r3"]),
                ))
                labels.append(Label.B if bad else Label.G)
            breaks.append(len(rows))
        table = FeatureTable(
            (("signal", CATEGORICAL), ("noise", CATEGORICAL)),
            tuple(rows), tuple(breaks),
        )
        return table, labels

    return build(n_train), build(n_dev)


def test_noise_removed_before_signal_in_seeded_runs():
    wins = 0
    for seed in range(20):
        rng = random.Random(1000 + seed)
        (tr_t, tr_l), (de_t, de_l) = planted_tables(rng)
        objective = make_wrapper_objective(tr_t, tr_l, de_t, de_l, max_iters=40)
        result = sbs(["signal", "noise"], objective)
        if result.removal_order.index("noise") < result.removal_order.index("signal"):
            wins += 1
    assert wins >= 19, f"signal outranked noise in only {wins}/20 runs"


def test_result_as_dict_is_json_ready():
    import json

    result = sbs(["a", "b"], lambda s: len(s) / 10)
    blob = json.loads(json.dumps(result.as_dict()))
    assert blob["removal_order"] == list(result.removal_order)
    assert blob["ranks"]["a"] in (1, 2)
