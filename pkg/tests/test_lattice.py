"""Lattice re-scoring tests with a brute-force path enumeration oracle."""

import itertools
import random

import pytest

from wcekit.lattice import Edge, Lattice, read_lattice, rescore, write_lattice
from wcekit.types import Label, ValidationError


def two_path_lattice():
    # start -(good,1.0)-> 1 -(ok,1.0)-> 3   vs   start -(oops,1.5)-> 2 -(fine,0.4)-> 3
    return Lattice(4, (
        Edge(0, 1, "good", 1.0),
        Edge(1, 3, "ok", 1.0),
        Edge(0, 2, "oops", 1.5),
        Edge(2, 3, "fine", 0.4),
    ))


def all_paths(lat):
    """Every start-to-end word/cost sequence, by depth-first enumeration."""
    out = []

    def walk(node, words, cost):
        if node == lat.end:
            out.append((words, cost))
            return
        for e in lat.edges:
            if e.head == node:
                walk(e.tail, words + [e.word], cost + e.cost)

    walk(lat.start, [], 0.0)
    return out


class TestRescore:
    def test_no_adjustment_returns_baseline_best(self):
        lat = two_path_lattice()
        words, cost = rescore(lat, {}, reward=0.0, penalty=0.0)
        assert (words, cost) == (["oops", "fine"], pytest.approx(1.9))

    def test_penalty_flips_to_alternative_path(self):
        lat = two_path_lattice()
        confidence = {"oops": Label.B}
        words, cost = rescore(lat, confidence, reward=0.0, penalty=1.0)
        assert words == ["good", "ok"]
        assert cost == pytest.approx(2.0)

    def test_reward_label_good(self):
        lat = two_path_lattice()
        words, cost = rescore(lat, {"good": Label.G}, reward=0.5, penalty=0.0)
        assert words == ["good", "ok"]
        assert cost == pytest.approx(1.5)

    def test_continuous_confidence_neutral_at_half(self):
        lat = two_path_lattice()
        base = rescore(lat, {}, 0.0, 0.0)
        neutral = rescore(lat, {"oops": 0.5, "good": 0.5}, reward=2.0)
        assert neutral == base

    def test_continuous_confidence_scales_reward(self):
        lat = two_path_lattice()
        words, cost = rescore(lat, {"good": 1.0}, reward=0.5)
        assert words == ["good", "ok"] and cost == pytest.approx(1.5)
        words2, _ = rescore(lat, {"good": 0.0}, reward=0.2)
        assert words2 == ["oops", "fine"]

    def test_single_path_lattice(self):
        lat = Lattice(3, (Edge(0, 1, "a", 1.0), Edge(1, 2, "b", 1.0)))
        for reward, penalty in [(0, 0), (5, 5), (0.1, 9)]:
            words, _ = rescore(lat, {"a": Label.B, "b": Label.G}, reward, penalty)
            assert words == ["a", "b"]

    def test_callable_confidence(self):
        lat = two_path_lattice()
        words, _ = rescore(lat, lambda w: Label.B if w == "oops" else None, penalty=3.0)
        assert words == ["good", "ok"]

    def test_cost_matches_brute_force_on_random_lattices(self):
        rng = random.Random(19)
        vocab = ["u", "v", "w", "x"]
        checked = 0
        while checked < 60:
            n = rng.randint(2, 5)
            edges = [Edge(i, i + 1, rng.choice(vocab), rng.uniform(0, 2)) for i in range(n - 1)]
            extra = rng.randint(0, min(8, 12 - len(edges)))
            for _ in range(extra):
                a = rng.randrange(n - 1)
                b = rng.randrange(a + 1, n)
                edges.append(Edge(a, b, rng.choice(vocab), rng.uniform(0, 2)))
            lat = Lattice(n, tuple(edges))
            assert len(lat.edges) <= 12
            conf = {w: rng.choice([Label.G, Label.B, rng.random(), None]) for w in vocab}
            reward, penalty = rng.uniform(0, 1), rng.uniform(0, 1)
            _, cost = rescore(lat, conf, reward, penalty)

            def adjust(word):
                v = conf[word]
                if v is None:
                    return 0.0
                if isinstance(v, Label):
                    return -reward if v is Label.G else penalty
                return -reward * (2 * v - 1)

            best = min(
                sum(adjust(w) for w in words) + base_cost
                for words, base_cost in all_paths(lat)
            )
            assert cost == pytest.approx(best, abs=1e-12)
            checked += 1

    def test_more_bad_words_never_become_preferable_as_penalty_grows(self):
        lat = two_path_lattice()
        conf = {"oops": Label.B, "fine": Label.B, "good": Label.G, "ok": Label.G}
        chosen = []
        for penalty in [0.0, 0.2, 0.5, 1.0, 5.0]:
            words, _ = rescore(lat, conf, reward=0.0, penalty=penalty)
            chosen.append(sum(1 for w in words if conf[w] is Label.B))
        assert all(a >= b for a, b in zip(chosen, chosen[1:]))


class TestLatticeValidation:
    def test_cycle_rejected(self):
        with pytest.raises(ValidationError, match="cycle"):
            Lattice(3, (Edge(0, 1, "a", 1.0), Edge(1, 0, "b", 1.0), Edge(1, 2, "c", 1.0)))

    def test_dangling_node_rejected(self):
        with pytest.raises(ValidationError, match="no start-to-end path"):
            Lattice(3, (Edge(0, 2, "a", 1.0),))

    def test_unreachable_end_rejected(self):
        with pytest.raises(ValidationError):
            Lattice(2, ())

    def test_non_finite_cost_rejected(self):
        with pytest.raises(ValidationError):
            Lattice(2, (Edge(0, 1, "a", float("inf")),))


class TestLatticeIO:
    def test_round_trip(self, tmp_path):
        lat = two_path_lattice()
        p = tmp_path / "lat.txt"
        write_lattice(lat, p)
        assert read_lattice(p) == lat

    def test_format(self, tmp_path):
        p = tmp_path / "lat.txt"
        p.write_text("NODES 2\n0 1 hello 0.25\n", encoding="utf-8")
        lat = read_lattice(p)
        assert lat.edges[0].word == "hello"
        assert lat.edges[0].cost == 0.25

    def test_bad_header(self, tmp_path):
        p = tmp_path / "lat.txt"
        p.write_text("EDGES 2\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            read_lattice(p)
