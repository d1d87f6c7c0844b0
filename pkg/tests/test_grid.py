import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfcz.grid import (
    DyadicInterval,
    FrequencySet,
    Interval,
    SampledSignal,
    apply_multiplier,
    dft,
    frequencies,
    idft,
    integrate,
    mode,
    norm,
    restrict,
)


def ones(M=256, x0=0.0, L=1.0):
    return SampledSignal(np.ones(M), x0, L / M)


def random_signal(rng, M, x0=0.0, dx=None):
    dx = dx if dx is not None else 1.0 / M
    return SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), x0, dx)


class TestTypes:
    def test_interval_rejects_empty(self):
        with pytest.raises(ValueError):
            Interval(1.0, 1.0)

    def test_dilate_keeps_center(self):
        I = Interval(1.0, 3.0).dilate(3)
        assert (I.a, I.b) == (-1.0, 5.0)

    def test_dyadic_length_exact(self):
        w = DyadicInterval(-5, 7)
        assert w.length == 2.0**-5
        assert w.interval == Interval(7 / 32, 8 / 32)
        assert DyadicInterval.containing(0.23, -5) == w
        assert w.parent() == DyadicInterval(-4, 3)

    def test_frequency_set_strict(self):
        with pytest.raises(ValueError):
            FrequencySet([0.0, 0.0])
        with pytest.raises(ValueError):
            FrequencySet([1.0, 0.0])
        with pytest.raises(ValueError):
            FrequencySet([])
        assert FrequencySet([0.0, 2.0, 5.0]).min_gap == 2.0

    def test_signal_validation(self):
        with pytest.raises(ValueError):
            SampledSignal([1.0, np.nan])
        with pytest.raises(ValueError):
            SampledSignal([1.0], 0.0, 0.0)
        f = SampledSignal([1.0, 2.0])
        with pytest.raises(ValueError):
            f.samples[0] = 3.0


class TestQuadrature:
    def test_constant_integrates_exactly(self):
        assert integrate(ones(), Interval(0, 1)) == 1.0

    def test_disjoint_interval_gives_zero(self):
        assert integrate(ones(), Interval(2, 3)) == 0

    def test_trig_polynomial_below_nyquist(self):
        f = mode(1.0, 0.0, 2.0**-8, 256)
        assert abs(integrate(f, Interval(0, 1))) < 1e-12

    def test_norms(self):
        f = ones()
        assert norm(f, Interval(0, 1), 1) == 1.0
        assert norm(f, Interval(0, 1), math.inf) == 1.0
        g = SampledSignal(np.r_[np.ones(16), 2 * np.ones(16)], 0.0, 1 / 16)
        assert norm(g, Interval(0, 2), 2) == pytest.approx(math.sqrt(5), rel=1e-15)
        with pytest.raises(ValueError):
            norm(f, p=0.5)

    def test_general_p_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        f = random_signal(rng, 100)
        direct = (f.dx * np.sum(np.abs(f.samples) ** 3)) ** (1 / 3)
        assert norm(f, p=3) == pytest.approx(direct, rel=1e-13)


class TestRestrict:
    def test_identity_on_domain(self):
        rng = np.random.default_rng(0)
        f = random_signal(rng, 64)
        assert np.array_equal(restrict(f, f.domain).samples, f.samples)

    def test_disjoint_is_zero(self):
        f = ones()
        assert not np.any(restrict(f, Interval(5, 6)).samples)

    @given(st.floats(-0.5, 1.5), st.floats(0.01, 2.0), st.integers(0, 2**31))
    @settings(max_examples=50, deadline=None)
    def test_idempotent_and_contractive(self, a, length, seed):
        f = random_signal(np.random.default_rng(seed), 64)
        J = Interval(a, a + length)
        r = restrict(f, J)
        assert np.array_equal(restrict(r, J).samples, r.samples)
        for p in (1, 2, 3, math.inf):
            assert norm(r, p=p) <= norm(f, p=p)
        assert norm(r, p=1) == pytest.approx(norm(f, J, 1), rel=1e-14, abs=0)


class TestFourier:
    @pytest.mark.parametrize("log_m", range(8, 15))
    def test_round_trip_and_plancherel(self, log_m):
        rng = np.random.default_rng(log_m)
        M = 1 << log_m
        f = random_signal(rng, M, x0=-0.3, dx=0.7 / M)
        F = dft(f)
        back = idft(F, f.x0, f.dx)
        assert np.linalg.norm(back.samples - f.samples) <= 1e-10 * np.linalg.norm(f.samples)
        assert np.sum(np.abs(F) ** 2) / f.period == pytest.approx(norm(f) ** 2, rel=1e-10)

    def test_dft_approximates_fourier_transform_of_gaussian(self):
        M, L = 1024, 20.0
        f = SampledSignal.from_function(lambda x: np.exp(-np.pi * x**2), -L / 2, L / M, M)
        nu = frequencies(M, f.dx)
        assert np.max(np.abs(dft(f) - np.exp(-np.pi * nu**2))) < 1e-12

    def test_identity_and_zero_symbols(self):
        rng = np.random.default_rng(1)
        f = random_signal(rng, 128)
        out = apply_multiplier(f, lambda nu: np.ones_like(nu))
        assert np.linalg.norm(out.samples - f.samples) <= 1e-10 * np.linalg.norm(f.samples)
        assert np.allclose(apply_multiplier(f, 0.0).samples, 0)

    def test_single_mode_is_scaled(self):
        M = 256
        f = mode(17.0, 0.25, 1.0 / M, M)
        out = apply_multiplier(f, lambda nu: np.cos(nu) + 1j * nu)
        assert np.max(np.abs(out.samples - (np.cos(17.0) + 17j) * f.samples)) < 1e-10

    def test_linearity(self):
        rng = np.random.default_rng(2)
        f, g = random_signal(rng, 128), random_signal(rng, 128)
        sym = rng.normal(size=128)
        a, b = 1.5 - 2j, 0.3j
        lhs = apply_multiplier(a * f + b * g, sym).samples
        rhs = a * apply_multiplier(f, sym).samples + b * apply_multiplier(g, sym).samples
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)
