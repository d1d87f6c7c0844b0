import math

import numpy as np
import pytest
import sympy as sp

from mfcz.grid import DyadicInterval, FrequencySet, SampledSignal, apply_multiplier, frequencies, mode, norm
from mfcz.multifreq import (
    KRange,
    MotherSymbol,
    MultiplierFamily,
    SmoothingKernel,
    calV,
    default_family,
    delta_k,
    delta_stack,
    exp_sum_lhs,
    fit_slope,
    lepingle_ratio,
    mets_ratio,
    orthsums_ratio,
    scaling_scan,
    symbol_variation,
    vets_ratio,
    weak_scan,
    weak_type_scan,
)
from mfcz.variation import VectorSequence, tilde_variation_bruteforce, variation


@pytest.fixture(scope="module")
def fam():
    return default_family()


def sympy_derivatives(order):
    t = sp.symbols("t")
    expr = sp.exp(4 - 1 / (t * (1 - t)))
    return [sp.lambdify(t, sp.diff(expr, t, n), "numpy") for n in range(order + 1)]


def random_signal(rng, M=1024):
    return SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), 0.0, 1.0 / M)


class TestMotherSymbol:
    def test_normalization_and_range(self):
        m = MotherSymbol()
        assert m(0.5) == 1.0
        t = np.linspace(-1, 2, 30001)
        v = m(t)
        assert np.all((v >= 0) & (v <= 1))
        assert np.all(v[(t <= 0) | (t >= 1)] == 0)

    def test_derivatives_match_sympy(self):
        m = MotherSymbol(max_order=6)
        ref = sympy_derivatives(6)
        t = np.linspace(0.02, 0.98, 97)
        for n in range(7):
            want = ref[n](t)
            got = m.derivative(t, n)
            assert np.allclose(got, want, rtol=1e-9, atol=1e-12 * np.abs(want).max())

    def test_derivatives_vanish_at_endpoints(self):
        m = MotherSymbol()
        for n in range(5):
            assert m.derivative([0.0, 1.0, 1e-3, 1 - 1e-3], n)[:2].tolist() == [0.0, 0.0]
            assert np.all(np.abs(m.derivative([1e-3, 1 - 1e-3], n)) < 1e-100)

    def test_order_limits(self):
        with pytest.raises(ValueError):
            MotherSymbol(max_order=3)
        with pytest.raises(ValueError):
            MotherSymbol().derivative(0.5, 99)

    def test_sup_derivative_against_dense_sympy(self):
        m = MotherSymbol()
        ref = sympy_derivatives(4)
        t = np.linspace(1e-3, 1 - 1e-3, 200001)
        for n in range(5):
            dense = np.abs(ref[n](t)).max()
            assert m.sup_derivative(n) == pytest.approx(dense, rel=1e-8)
            assert m.sup_derivative(n) >= dense


class TestFamily:
    def test_D0_is_one(self, fam):
        assert fam.D[0] == 1.0

    def test_support_exactness(self, fam):
        rng = np.random.default_rng(0)
        for _ in range(100):
            w = DyadicInterval(int(rng.integers(-8, 9)), int(rng.integers(-100, 100)))
            I = w.interval
            xi = np.concatenate([
                rng.uniform(I.a - 5 * w.length, I.a, 50),
                rng.uniform(I.b, I.b + 5 * w.length, 50),
                [I.a, I.b],
            ])
            assert not np.any(fam.phi_hat(w, xi))
            assert fam.phi_hat(w, I.center) == 1.0

    @pytest.mark.parametrize("M", range(1, 5))
    def test_D_scale_invariant(self, fam, M):
        # |omega|^M phi_hat^(M) by five-point differences of the analytic (M-1)-th derivative
        sups = []
        for k in (-3, 0, 5):
            w = DyadicInterval(k, 3)
            I = w.interval
            xi = np.linspace(I.a, I.b, 1 << 14)
            h = w.length * 2.0**-14
            F = lambda x: fam.phi_hat(w, x, M - 1)
            d = (F(xi - 2 * h) - 8 * F(xi - h) + 8 * F(xi + h) - F(xi + 2 * h)) / (12 * h)
            sups.append(w.length**M * np.abs(d).max())
        assert np.allclose(sups, fam.D[M], rtol=1e-6)

    def test_cell_sum(self, fam):
        rng = np.random.default_rng(1)
        xi = rng.uniform(-50, 50, 200)
        for k in (-2, 0, 3):
            explicit = np.array([fam.phi_hat(DyadicInterval.containing(x, k), x) for x in xi]).ravel()
            assert np.array_equal(fam.cell_sum(k, xi), explicit)


class TestKRange:
    def test_parse_and_iterate(self):
        ks = KRange.parse("-2:3")
        assert list(ks) == [-2, -1, 0, 1, 2, 3] and len(ks) == 6
        with pytest.raises(ValueError):
            KRange(3, 2)

    def test_grid_range(self):
        f = SampledSignal.zeros(1 << 14, 0.0, 2.0**-14)
        assert KRange.for_grid(f) == KRange(3, 13)
        KRange(3, 13).check(f)
        for bad in (KRange(2, 5), KRange(3, 14)):
            with pytest.raises(ValueError):
                bad.check(f)

    def test_smoothing_kernel(self):
        psi = SmoothingKernel()
        assert psi(0.0) == 1.0
        assert np.all(psi(np.array([-3.0, -1.0, 1.0, 2.0])) == 0)
        assert psi.scaled(3, 4.0) == psi(0.5)


class TestDelta:
    def test_disjoint_spectrum_is_zero(self, fam):
        M = 1024
        f = mode(100.0, 0.0, 1 / M, M) + mode(-37.0, 0.0, 1 / M, M)
        # X sits in [192, 256), far from both modes at scale 6
        out = delta_k(f, [200.0], 6, fam)
        assert np.abs(out.samples).max() < 1e-12

    def test_single_mode_scaled(self, fam):
        M = 1024
        f = mode(75.0, 0.0, 1 / M, M, amplitude=2 - 1j)
        for k in (4, 5, 6):
            out = delta_k(f, [70.0, 300.0], k, fam)
            s = 75.0 / 2**k
            assert np.abs(out.samples - fam.mother(s - math.floor(s)) * f.samples).max() < 1e-10

    def test_rejects_scale(self, fam):
        f = SampledSignal.zeros(1024, 0.0, 1 / 1024)
        with pytest.raises(ValueError):
            delta_k(f, [0.0], 11, fam)
        with pytest.raises(ValueError):
            delta_k(f, [0.0], 2, fam)

    def test_bounded_by_D0(self, fam):
        rng = np.random.default_rng(0)
        for _ in range(5):
            f = random_signal(rng)
            X = FrequencySet(np.sort(rng.uniform(-512, 512, 16)))
            for k in KRange.for_grid(f):
                assert norm(delta_k(f, X, k, fam)) <= fam.D[0] * norm(f) * (1 + 1e-12)

    def test_disjoint_cells_plancherel(self, fam):
        rng = np.random.default_rng(1)
        f = random_signal(rng)
        nu = frequencies(f.M, f.dx)
        for k in (3, 5, 8):
            total = 0.0
            for n in np.unique(np.floor(nu / 2**k)).astype(int):
                w = DyadicInterval(k, n)
                total += norm(apply_multiplier(f, lambda v: fam.phi_hat(w, v))) ** 2
            assert total <= fam.D[0] ** 2 * norm(f) ** 2 * (1 + 1e-8)


class TestCalV:
    def test_zero(self, fam):
        f = SampledSignal.zeros(256, 0.0, 1 / 256)
        assert not np.any(calV(f, [3.0], KRange(3, 7), 4.0, fam).samples)

    def test_single_scale_is_modulus(self, fam):
        rng = np.random.default_rng(2)
        f = random_signal(rng, 256)
        X = [10.0, 70.0]
        V = calV(f, X, KRange(5, 5), 3.0, fam).samples.real
        assert np.allclose(V, np.abs(delta_k(f, X, 5, fam).samples), rtol=1e-14)

    def test_one_nonzero_scale(self, fam):
        # nu = 64 sits on a cell edge (m = 0) for every k <= 6 and mid-cell at k = 7
        M = 256
        f = mode(64.0, 0.0, 1 / M, M, amplitude=1.5)
        V = calV(f, [64.5], KRange(3, 7), 4.0, fam).samples.real
        # sup term plus the one jump from 0: twice the modulus
        assert np.allclose(V, 2 * 1.5, rtol=1e-12)

    def test_matches_bruteforce(self, fam):
        rng = np.random.default_rng(3)
        f = random_signal(rng, 1024)
        X = np.sort(rng.uniform(-400, 400, 4))
        ks = KRange(3, 9)
        V = calV(f, X, ks, 4.0, fam).samples.real
        stack = delta_stack(f, X, ks, fam)
        for i in rng.choice(f.M, 40, replace=False):
            s = VectorSequence(ks.keys, stack[:, i])
            want = s.sup_norm() + tilde_variation_bruteforce(s, 4.0)
            assert abs(V[i] - want) <= 1e-12 * (1 + want)

    def test_homogeneous(self, fam):
        rng = np.random.default_rng(4)
        f = random_signal(rng, 512)
        X = [-100.0, 3.0, 90.0]
        ks = KRange.for_grid(f)
        c = -0.7 + 2.1j
        assert np.allclose(calV(c * f, X, ks, 4.0, fam).samples, abs(c) * calV(f, X, ks, 4.0, fam).samples, rtol=1e-12)

    def test_modulation_covariance(self, fam):
        rng = np.random.default_rng(5)
        M = 1024
        nu = frequencies(M, 1 / M)
        F = (rng.normal(size=M) + 1j * rng.normal(size=M)) * ((nu >= -400) & (nu <= -10))
        f = SampledSignal(np.fft.ifft(F), 0.0, 1 / M)
        ks = KRange(3, 9)
        eta = 512.0
        X = np.array([-300.0, -120.5, -40.0])
        g = f.with_samples(f.samples * np.exp(2j * np.pi * eta * f.x))
        a = calV(f, X, ks, 4.0, fam).samples.real
        b = calV(g, X + eta, ks, 4.0, fam).samples.real
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12 * a.max())

    def test_rejects_q(self, fam):
        with pytest.raises(ValueError):
            calV(SampledSignal.zeros(256, 0.0, 1 / 256), [0.0], KRange(3, 5), 2.0, fam)


class TestSymbolVariation:
    def test_zero_frequency(self, fam):
        assert symbol_variation(0.0, KRange(-5, 5), 2.5, fam) == 0.0

    def test_mid_cell(self, fam):
        k0 = 4
        seq = fam.cell_sum(0, np.ldexp(np.full(5, 2.0 ** (k0 - 1)), -np.arange(2, 7)))
        assert seq[k0 - 2] == 1.0
        assert symbol_variation(2.0 ** (k0 - 1), KRange(2, 6), 2.5, fam) >= 1.0

    def test_one_third_tabulated(self, fam):
        m = MotherSymbol()
        vals = []
        for k in range(-6, 1):
            s = (1 / 3) * 2.0**-k
            vals.append(float(m(s - math.floor(s))))
        s = VectorSequence(np.arange(-6, 1), vals)
        want = max(abs(v) for v in vals) + tilde_variation_bruteforce(s, 2.5)
        assert symbol_variation(1 / 3, KRange(-6, 0), 2.5, fam) == pytest.approx(want, abs=1e-12)


class TestOrthSums:
    def test_integer_frequencies(self):
        rng = np.random.default_rng(0)
        for N in (1, 3, 8):
            xi = np.sort(rng.choice(np.arange(-30, 31), N, replace=False)).astype(float)
            d = rng.normal(size=N) + 1j * rng.normal(size=N)
            assert orthsums_ratio(d, xi, 256) == pytest.approx(1.0, abs=1e-10)

    def test_single(self):
        assert orthsums_ratio([2 - 1j], [0.37], 64) == pytest.approx(1.0, abs=1e-15)

    def test_grid_precondition(self):
        with pytest.raises(ValueError):
            orthsums_ratio([1, 1], [0.0, 40.0], 64)


class TestExpSums:
    def test_constant_single_frequency(self):
        c = VectorSequence.from_values(np.full((6, 1), 2.0 - 0.5j))
        assert vets_ratio(c, [3.3], 2.5, 4.0, 256) == pytest.approx(1.0, abs=1e-12)
        assert mets_ratio(c, [3.3], 2.5, 256) == pytest.approx(1.0, abs=1e-12)

    def test_zero(self):
        c = VectorSequence.from_values(np.zeros((4, 3)))
        assert vets_ratio(c, [0.0, 1.0, 2.0], 2.5, 4.0, 128) == 0.0
        assert mets_ratio(c, [0.0, 1.0, 2.0], 2.5, 128) == 0.0

    def test_parameter_order(self):
        c = VectorSequence.from_values(np.ones((3, 1)))
        with pytest.raises(ValueError):
            vets_ratio(c, [0.0], 4.0, 3.0, 64)
        with pytest.raises(ValueError):
            vets_ratio(c, [0.0], 2.0, 3.0, 64)
        with pytest.raises(ValueError):
            mets_ratio(c, [0.0], 2.0, 64)

    def test_gap(self):
        c = VectorSequence.from_values(np.ones((3, 2)))
        with pytest.raises(ValueError):
            vets_ratio(c, [0.0, 0.5], 2.5, 4.0, 64)
        assert vets_ratio(c, [0.0, 0.5], 2.5, 4.0, 64, min_gap=0.0) > 0

    def test_sup_below_variation(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            N = int(rng.integers(1, 6))
            xi = np.sort(rng.choice(np.arange(-20, 21), N, replace=False)).astype(float)
            c = VectorSequence.from_values(rng.normal(size=(int(rng.integers(1, 9)), N)) + 0j)
            assert exp_sum_lhs(c, xi, None, 256) <= exp_sum_lhs(c, xi, 4.0, 256) * (1 + 1e-12)


class TestLepingle:
    def test_zero(self):
        assert lepingle_ratio(SampledSignal.zeros(256, 0.0, 1 / 256), KRange(3, 7), 2.5) == 0.0

    def test_constant_signal(self):
        g = SampledSignal(np.full(256, 1.5 + 0.5j), 0.0, 1 / 256)
        assert lepingle_ratio(g, KRange(3, 7), 2.5) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_r(self):
        with pytest.raises(ValueError):
            lepingle_ratio(SampledSignal.zeros(256, 0.0, 1 / 256), KRange(3, 7), 2.0)


class TestWeakType:
    def test_above_max_and_zero(self, fam):
        rng = np.random.default_rng(8)
        f = random_signal(rng, 512)
        X = [5.0, 40.0]
        ks = KRange.for_grid(f)
        vmax = calV(f, X, ks, 4.0, fam).samples.real.max()
        rows = weak_type_scan(f, X, ks, 4.0, [vmax * 1.01, vmax * 2], fam)
        assert [r.ratio for r in rows] == [0.0, 0.0]
        z = weak_type_scan(SampledSignal.zeros(512, 0.0, 1 / 512), X, ks, 4.0, [0.1, 1.0], fam)
        assert all(r.ratio == 0 and r.measure == 0 for r in z)

    def test_measure_by_counting(self, fam):
        rng = np.random.default_rng(9)
        f = random_signal(rng, 512)
        X = [5.0, 40.0, 41.0]
        ks = KRange.for_grid(f)
        V = calV(f, X, ks, 4.0, fam).samples.real
        lam = float(np.median(V))
        row = weak_type_scan(f, X, ks, 4.0, [lam], fam)[0]
        assert row.measure == np.count_nonzero(V > lam) / 512
        assert row.ratio == pytest.approx(lam * row.measure / (math.sqrt(3) * norm(f, p=1)))


class TestScans:
    def test_single_N_has_no_fit(self):
        res = scaling_scan([1], 5, 4.0, 2.5, seed=3, grid=1 << 10)
        assert res.slope is None and res.passed and len(res.rows) == 5
        assert res.fit_json()["slope"] is None

    def test_deterministic(self):
        a = scaling_scan([2, 4], 5, 4.0, 2.5, seed=11, grid=1 << 10)
        b = scaling_scan([2, 4], 5, 4.0, 2.5, seed=11, grid=1 << 10)
        assert a.rows == b.rows and a.slope == b.slope

    def test_trial_seed_independent_of_order(self):
        a = scaling_scan([2, 4], 5, 4.0, 2.5, seed=11, grid=1 << 10)
        b = scaling_scan([4], 5, 4.0, 2.5, seed=11, grid=1 << 10)
        assert [r for r in a.rows if r.N == 4] == b.rows

    def test_rejects(self):
        with pytest.raises(ValueError):
            scaling_scan([2, 4], 4, 4.0, 2.5, seed=0)
        with pytest.raises(ValueError):
            scaling_scan([2, 4], 5, 2.5, 3.0, seed=0)
        with pytest.raises(ValueError):
            scaling_scan([4, 2], 5, 4.0, 2.5, seed=0)

    def test_weak_scan_small(self):
        res = weak_scan([1, 2, 4], 5, 4.0, 2.5, seed=1, grid=1 << 10)
        assert res.slope is not None and all(v > 0 for v in res.per_N.values())

    def test_fit_slope(self):
        Ns = np.array([2, 4, 8, 16])
        slope, icpt = fit_slope(Ns, 3.0 * Ns**0.25)
        assert slope == pytest.approx(0.25) and icpt == pytest.approx(math.log(3.0))
