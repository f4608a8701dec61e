"""Geometric confidence fusion tests."""

import math
import random

import pytest

from wcekit.fusion import FusionConfig, combine_posteriors
from wcekit.types import ValidationError


class TestCombinePosteriors:
    def test_worked_value(self):
        (p,) = combine_posteriors([0.9], [0.4], FusionConfig(0.5))
        u_good = math.sqrt(0.9 * 0.4)
        u_bad = math.sqrt(0.1 * 0.6)
        assert p == pytest.approx(u_good / (u_good + u_bad), abs=1e-12)
        assert p == pytest.approx(0.71010, abs=1e-5)

    def test_alpha_one_returns_asr_exactly(self):
        rng = random.Random(1)
        pa = [rng.random() for _ in range(50)]
        pm = [rng.random() for _ in range(50)]
        assert combine_posteriors(pa, pm, FusionConfig(1.0)) == pa
        assert combine_posteriors(pa, pm, FusionConfig(0.0)) == pm

    def test_equal_inputs_are_fixed_points(self):
        for alpha in (0.0, 0.25, 0.5, 0.9, 1.0):
            for p in (0.0, 0.2, 0.5, 0.8, 1.0):
                (out,) = combine_posteriors([p], [p], FusionConfig(alpha))
                assert out == pytest.approx(p, abs=1e-12)

    def test_symmetry(self):
        rng = random.Random(2)
        for _ in range(1000):
            pa, pm, alpha = rng.random(), rng.random(), rng.random()
            (x,) = combine_posteriors([pa], [pm], FusionConfig(alpha))
            (y,) = combine_posteriors([pm], [pa], FusionConfig(1.0 - alpha))
            assert x == pytest.approx(y, abs=1e-12)

    def test_monotone_in_each_argument(self):
        rng = random.Random(3)
        cfg = FusionConfig(0.5)
        for _ in range(200):
            pa, pm = rng.random(), rng.random()
            delta = rng.uniform(0, 1.0 - pa)
            (lo,) = combine_posteriors([pa], [pm], cfg)
            (hi,) = combine_posteriors([pa + delta], [pm], cfg)
            assert hi >= lo - 1e-12

    def test_degenerate_zero_mass(self):
        # p_asr = 1, p_mt = 0: both unnormalized terms vanish
        (out,) = combine_posteriors([1.0], [0.0], FusionConfig(0.5))
        assert out == 0.5

    def test_output_in_unit_interval(self):
        rng = random.Random(4)
        for _ in range(500):
            (out,) = combine_posteriors(
                [rng.random()], [rng.random()], FusionConfig(rng.random())
            )
            assert 0.0 <= out <= 1.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            FusionConfig(1.5)
        with pytest.raises(ValidationError):
            combine_posteriors([0.5], [0.5, 0.5], FusionConfig(0.5))
        with pytest.raises(ValidationError):
            combine_posteriors([1.2], [0.5], FusionConfig(0.5))
