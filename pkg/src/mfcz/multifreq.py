"""Frequency-localized multipliers over dyadic cells and their variation.

``Delta_k`` sums the multipliers ``phi_omega`` over the dyadic frequency
cells ``omega`` of length ``2**k`` that meet the frequency set ``X``;
``calV`` takes, at each point, the q-variation norm of ``Delta_k f`` over a
finite range of scales.  The ``*_ratio`` functions and the scans measure the
inequalities that control these operators; they report numbers, they do not
certify bounds.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import (
    DyadicInterval,
    FrequencySet,
    SampledSignal,
    apply_multipliers,
    as_frequency_set,
    frequencies,
    norm,
)
from .variation import VectorSequence, variation, variation_batch

M_MAX = 8
# natural log in the (1 + log N) factor
SCAN_M = 1


class MotherSymbol:
    """``m(t) = exp(4 - 1/(t(1-t)))`` on ``(0, 1)``, zero elsewhere; ``m(1/2) = 1``.

    Derivatives come from Leibniz' rule applied to ``m' = h' m`` with
    ``h(t) = 4 - 1/t - 1/(1-t)``, whose derivatives are explicit.
    """

    def __init__(self, max_order: int = M_MAX):
        if max_order < 4:
            raise ValueError("derivatives up to order 4 at least are required")
        self.max_order = max_order

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    @staticmethod
    def _h_derivative(t: np.ndarray, k: int) -> np.ndarray:
        fk = math.factorial(k)
        return -((-1) ** k) * fk * t ** (-k - 1) - fk * (1.0 - t) ** (-k - 1)

    def derivative(self, t, order: int) -> np.ndarray:
        if not 0 <= order <= self.max_order:
            raise ValueError(f"derivative order must lie in [0, {self.max_order}]")
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        inside = (t > 0) & (t < 1)
        ti = t[inside]
        with np.errstate(over="ignore", under="ignore"):
            u = [np.exp(4.0 - 1.0 / (ti * (1.0 - ti)))]
            live = u[0] > 0
            ti = np.where(live, ti, 0.5)
            hd = [None] + [self._h_derivative(ti, k) for k in range(1, order + 1)]
            for n in range(1, order + 1):
                acc = np.zeros(ti.shape)
                for k in range(n):
                    acc += math.comb(n - 1, k) * hd[k + 1] * u[n - 1 - k]
                u.append(acc)
        out[inside] = np.where(live, u[order], 0.0)
        return out

    @functools.lru_cache(maxsize=None)
    def sup_derivative(self, order: int) -> float:
        """``sup_t |m^(order)(t)|`` (grid search refined by a bounded minimizer)."""
        t = np.linspace(0.0, 1.0, 20001)
        vals = np.abs(self.derivative(t, order))
        i = int(np.argmax(vals))
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
        res = minimize_scalar(
            lambda s: -abs(float(self.derivative(np.array([s]), order)[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return max(float(vals[i]), -float(res.fun))


@dataclass(frozen=True)
class SmoothingKernel:
    """``psi_hat(xi) = exp(1 - 1/(1 - xi^2))`` on ``|xi| < 1``; ``psi_hat(0) = 1``."""

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape)
        inside = np.abs(xi) < 1
        with np.errstate(under="ignore"):
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi[inside] ** 2))
        return out

    def scaled(self, k: int, xi) -> np.ndarray:
        """``psi_hat(2**-k * xi)``: the multiplier of ``psi_k``."""
        return self(np.ldexp(np.asarray(xi, dtype=float), -k))


@dataclass(frozen=True)
class KRange:
    """Contiguous scales ``lo .. hi`` (inclusive)."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"empty scale range {self.lo}:{self.hi}")

    @property
    def keys(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __len__(self):
        return self.hi - self.lo + 1

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    @classmethod
    def parse(cls, text: str) -> "KRange":
        lo, _, hi = text.partition(":")
        return cls(int(lo), int(hi))

    @classmethod
    def for_grid(cls, f: SampledSignal) -> "KRange":
        """Widest valid range: at least 8 DFT bins per cell, cells within Nyquist."""
        lo = math.ceil(math.log2(8.0 / f.period) - 1e-12)
        hi = math.floor(math.log2(0.5 / f.dx) + 1e-12)
        return cls(lo, hi)

    def check(self, f: SampledSignal) -> None:
        full = KRange.for_grid(f)
        if self.lo < full.lo or self.hi > full.hi:
            raise ValueError(
                f"scales {self.lo}:{self.hi} outside the valid range {full.lo}:{full.hi} for this grid"
            )


class MultiplierFamily:
    """``phi_hat_omega(xi) = m((xi - 2**k n) / 2**k)`` for ``omega = [2**k n, 2**k (n+1))``.

    ``D[M] = sup |omega|^M |phi_hat_omega^(M)|`` does not depend on ``omega``
    and equals ``sup |m^(M)|``.
    """

    def __init__(self, mother: MotherSymbol | None = None, max_order: int = 4):
        self.mother = mother if mother is not None else MotherSymbol()
        self.max_order = max_order
        self.D = tuple(self.mother.sup_derivative(M) for M in range(max_order + 1))

    def phi_hat(self, omega: DyadicInterval, xi, order: int = 0) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        L = omega.length
        t = (xi - omega.interval.a) / L
        return self.mother.derivative(t, order) / L**order

    def cell_sum(self, k: int, xi) -> np.ndarray:
        """``sum over |omega| = 2**k`` of ``phi_hat_omega(xi)``."""
        s = np.ldexp(np.asarray(xi, dtype=float), -k)
        return self.mother(s - np.floor(s))

    def delta_symbol(self, k: int, X: FrequencySet, nu: np.ndarray) -> np.ndarray:
        """Symbol of ``Delta_k``: cells of length ``2**k`` meeting ``X``."""
        s = np.ldexp(nu, -k)
        cell = np.floor(s)
        chosen = np.unique(np.floor(np.ldexp(X.xi, -k)))
        return np.where(np.isin(cell, chosen), self.mother(s - cell), 0.0)


@functools.lru_cache(maxsize=None)
def default_family() -> MultiplierFamily:
    return MultiplierFamily()


def _fam(fam):
    return fam if fam is not None else default_family()


def delta_k(f: SampledSignal, X, k: int, fam: MultiplierFamily | None = None) -> SampledSignal:
    """``Delta_k f``: the sum of ``f * phi_omega`` over cells meeting ``X``."""
    fam = _fam(fam)
    X = as_frequency_set(X)
    KRange(k, k).check(f)
    nu = frequencies(f.M, f.dx)
    return f.with_samples(apply_multipliers(f, fam.delta_symbol(k, X, nu)[None, :])[0])


def delta_stack(f: SampledSignal, X, ks: KRange, fam: MultiplierFamily | None = None) -> np.ndarray:
    """All ``Delta_k f`` for ``k`` in ``ks`` as a ``(len(ks), M)`` array."""
    fam = _fam(fam)
    X = as_frequency_set(X)
    ks.check(f)
    nu = frequencies(f.M, f.dx)
    symbols = np.stack([fam.delta_symbol(k, X, nu) for k in ks])
    return apply_multipliers(f, symbols)


def calV(f: SampledSignal, X, ks: KRange, q: float, fam: MultiplierFamily | None = None) -> SampledSignal:
    """Pointwise q-variation norm over ``k`` in ``ks`` of ``Delta_k f``."""
    if not q > 2:
        raise ValueError(f"q must exceed 2, got {q}")
    stack = delta_stack(f, X, ks, fam)
    return f.with_samples(variation_batch(stack.T, q))


def symbol_variation(xi_j: float, ks: KRange, r: float, fam: MultiplierFamily | None = None) -> float:
    """V^r over ``k`` of ``sum_omega phi_hat_omega(xi_j)`` (one term per scale)."""
    fam = _fam(fam)
    seq = fam.cell_sum(0, np.ldexp(np.full(len(ks), float(xi_j)), -ks.keys))
    return variation(VectorSequence(ks.keys, seq), r)


def orthsums_ratio(d, xi, grid: int) -> float:
    """``||sum_j d_j exp(2 pi i xi_j y)||_{L^2[0,1]} / ||d||`` by the rectangle rule."""
    xi = as_frequency_set(xi)
    d = np.asarray(d, dtype=complex)
    if d.shape != (xi.N,):
        raise ValueError("need one coefficient per frequency")
    if grid < 4 * (1 + np.max(np.abs(xi.xi))):
        raise ValueError(f"grid of {grid} points is too coarse for these frequencies")
    y = np.arange(grid) / grid
    vals = np.exp(2j * np.pi * np.outer(y, xi.xi)) @ d
    dn = np.linalg.norm(d)
    if dn == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.abs(vals) ** 2)) / dn)


def _exp_sums(c: VectorSequence, xi: FrequencySet, grid: int) -> np.ndarray:
    if c.d != xi.N:
        raise ValueError(f"sequence values have dimension {c.d}, expected {xi.N}")
    y = np.arange(grid) / grid
    return np.exp(2j * np.pi * np.outer(y, xi.xi)) @ c.values.T  # (grid, K)


def vets_exponent(r: float, q: float) -> float:
    return (0.5 - 1.0 / r) * q / (q - 2.0)


def _check_gap(xi: FrequencySet, min_gap: float):
    if xi.N > 1 and xi.min_gap < min_gap:
        raise ValueError(f"frequency gap {xi.min_gap:.3g} below {min_gap:g}")


def vets_ratio(c: VectorSequence, xi, r: float, q: float, grid: int, min_gap: float = 1.0) -> float:
    """LHS / RHS of the variational exponential-sum inequality.

    LHS: ``L^2_y[0,1]`` norm of the q-variation over ``k`` of
    ``sum_j c_{k,j} exp(2 pi i xi_j y)``.  RHS:
    ``N**((1/2 - 1/r) q/(q-2)) * V^r(c)`` with ``l^2``-valued ``V^r``.
    """
    if not 2 < r < q:
        raise ValueError(f"need 2 < r < q, got r={r}, q={q}")
    xi = as_frequency_set(xi)
    _check_gap(xi, min_gap)
    lhs = float(np.sqrt(np.mean(variation_batch(_exp_sums(c, xi, grid), q) ** 2)))
    rhs = xi.N ** vets_exponent(r, q) * variation(c, r)
    return lhs / rhs if rhs > 0 else 0.0


def mets_ratio(c: VectorSequence, xi, r: float, grid: int, min_gap: float = 1.0) -> float:
    """As :func:`vets_ratio` with the sup over ``k`` and exponent ``1/2 - 1/r``."""
    if not r > 2:
        raise ValueError(f"need r > 2, got {r}")
    xi = as_frequency_set(xi)
    _check_gap(xi, min_gap)
    lhs = float(np.sqrt(np.mean(np.max(np.abs(_exp_sums(c, xi, grid)), axis=1) ** 2)))
    rhs = xi.N ** (0.5 - 1.0 / r) * variation(c, r)
    return lhs / rhs if rhs > 0 else 0.0


def exp_sum_lhs(c: VectorSequence, xi, q: float | None, grid: int) -> float:
    """LHS of either inequality: V^q (``q`` given) or sup (``q=None``) over ``k``."""
    S = _exp_sums(c, as_frequency_set(xi), grid)
    per_y = np.max(np.abs(S), axis=1) if q is None else variation_batch(S, q)
    return float(np.sqrt(np.mean(per_y**2)))


def lepingle_ratio(g: SampledSignal, ks: KRange, r: float, kernel: SmoothingKernel | None = None) -> float:
    """``||V^r_k (psi_k * g)||_{L^2} / ||g||_{L^2}`` with ``psi_hat_k = psi_hat(2**-k .)``."""
    if not r > 2:
        raise ValueError(f"need r > 2, got {r}")
    kernel = kernel or SmoothingKernel()
    ks.check(g)
    gn = norm(g, p=2)
    if gn == 0:
        return 0.0
    nu = frequencies(g.M, g.dx)
    stack = apply_multipliers(g, np.stack([kernel.scaled(k, nu) for k in ks]))
    V = variation_batch(stack.T, r)
    return float(math.sqrt(g.dx) * np.linalg.norm(V)) / gn


@dataclass
class WeakTypeRow:
    lam: float
    measure: float
    ratio: float


def weak_type_scan(f: SampledSignal, X, ks: KRange, q: float, lambdas, fam: MultiplierFamily | None = None) -> list[WeakTypeRow]:
    """``lam * |{calV f > lam}| / (sqrt(N) ||f||_1)`` for each ``lam``."""
    X = as_frequency_set(X)
    V = np.real(calV(f, X, ks, q, fam).samples)
    f1 = norm(f, p=1)
    rows = []
    for lam in lambdas:
        meas = np.count_nonzero(V > lam) * f.dx
        ratio = lam * meas / (math.sqrt(X.N) * f1) if f1 > 0 else 0.0
        rows.append(WeakTypeRow(float(lam), float(meas), float(ratio)))
    return rows


def trial_seed(seed: int, t: int) -> int:
    """64-bit seed for trial ``t`` derived from the base seed."""
    return int(np.random.SeedSequence([int(seed), int(t)]).generate_state(1, np.uint64)[0])


def random_frequencies(rng: np.random.Generator, N: int, band: float, min_gap: float = 1.0) -> FrequencySet:
    """``N`` frequencies uniform in ``[-band, band]`` with gaps at least ``min_gap``."""
    while True:
        xi = np.sort(rng.uniform(-band, band, N))
        if N == 1 or np.diff(xi).min() >= min_gap:
            return FrequencySet(xi)


def random_trial_signal(rng: np.random.Generator, X: FrequencySet, M: int) -> SampledSignal:
    """Windowed exponential sum at the frequencies of ``X`` plus a little noise, on ``[0, 1)``."""
    dx = 1.0 / M
    x = np.arange(M) * dx
    width = 10 ** rng.uniform(-2.0, -0.7)
    center = rng.uniform(0.3, 0.7)
    window = np.exp(-0.5 * ((x - center) / width) ** 2)
    a = rng.normal(size=X.N) + 1j * rng.normal(size=X.N)
    detune = rng.normal(scale=2.0 / width, size=X.N)
    f = window * (np.exp(2j * np.pi * np.outer(x, X.xi + detune)) @ a)
    f += 0.05 * np.abs(a).mean() * (rng.normal(size=M) + 1j * rng.normal(size=M))
    return SampledSignal(f, 0.0, dx)


def bracket_factor(X: FrequencySet, ks: KRange, r: float, fam: MultiplierFamily, M: int = SCAN_M) -> tuple[float, float]:
    """``A = (1 + log N)(D_M + max_j V^r symbol)`` and the symbol part alone."""
    sv = max(symbol_variation(x, ks, r, fam) for x in X.xi)
    return (1.0 + math.log(X.N)) * (fam.D[M] + sv), sv


@dataclass
class ScanRow:
    N: int
    trial: int
    seed: int
    S: float
    A: float
    D0: float
    D1: float
    sup_symbol_variation: float


@dataclass
class ScanResult:
    rows: list[ScanRow]
    per_N: dict[int, float]
    slope: float | None
    intercept: float | None
    exponent: float
    budget: float
    M: int = SCAN_M
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.slope is None or self.slope <= self.budget

    def fit_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "exponent": self.exponent,
            "exponent_budget": self.budget,
            "M": self.M,
            "per_N": {str(k): v for k, v in self.per_N.items()},
            "pass": self.passed,
            **self.extra,
        }


SCAN_SLACK = 0.35


def fit_slope(Ns, values) -> tuple[float | None, float | None]:
    """Least-squares slope and intercept of ``log(values)`` against ``log(Ns)``."""
    Ns = np.asarray(Ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.unique(Ns).size < 2:
        return None, None
    slope, intercept = np.polyfit(np.log(Ns), np.log(values), 1)
    return float(slope), float(intercept)


def _scan_range(grid: int, ks: KRange | None) -> KRange:
    z = SampledSignal.zeros(grid, 0.0, 1.0 / grid)
    if ks is None:
        return KRange.for_grid(z)
    ks.check(z)
    return ks


def _check_scan_args(Ns, trials, q, r):
    if not 2 < r < q:
        raise ValueError(f"need 2 < r < q, got r={r}, q={q}")
    if trials < 5:
        raise ValueError(f"need at least 5 trials for a stable fit, got {trials}")
    if list(Ns) != sorted(Ns) or any(n < 1 for n in Ns):
        raise ValueError("Ns must be ascending positive integers")


def scaling_scan(Ns, trials: int, q: float, r: float, seed: int, grid: int = 1 << 14,
                 fam: MultiplierFamily | None = None, ks: KRange | None = None) -> ScanResult:
    """Empirical N-dependence of ``||calV f||_2 / (A ||f||_2)``.

    For each ``N`` the per-trial ratios are maximised; the slope of their
    logarithm against ``log N`` is compared with ``(1/2 - 1/r) q/(q-2)``
    plus ``SCAN_SLACK``.
    """
    _check_scan_args(Ns, trials, q, r)
    fam = _fam(fam)
    ks = _scan_range(grid, ks)
    band = grid / 4
    rows = []
    per_N = {}
    for N in Ns:
        best = 0.0
        for t in range(trials):
            s = trial_seed(seed, t)
            rng = np.random.default_rng([s, N])
            X = random_frequencies(rng, N, band)
            f = random_trial_signal(rng, X, grid)
            V = calV(f, X, ks, q, fam)
            A, sv = bracket_factor(X, ks, r, fam)
            S = norm(V, p=2) / (A * norm(f, p=2))
            rows.append(ScanRow(N, t, s, S, A, fam.D[0], fam.D[1], sv))
            best = max(best, S)
        per_N[N] = best
    slope, intercept = fit_slope(list(per_N), list(per_N.values()))
    exponent = vets_exponent(r, q)
    return ScanResult(rows, per_N, slope, intercept, exponent, exponent + SCAN_SLACK)


def random_l1_signal(rng: np.random.Generator, X: FrequencySet, M: int) -> SampledSignal:
    """A few narrow bumps, some modulated to frequencies of ``X``, on ``[0, 1)``."""
    dx = 1.0 / M
    x = np.arange(M) * dx
    f = np.zeros(M, complex)
    for _ in range(int(rng.integers(1, 5))):
        c = rng.uniform(0.3, 0.7)
        w = 10 ** rng.uniform(-3.0, -1.5)
        a = rng.normal() + 1j * rng.normal()
        nu = rng.choice(X.xi) if rng.random() < 0.5 else 0.0
        f += a * np.exp(-0.5 * ((x - c) / w) ** 2) * np.exp(2j * np.pi * nu * x) / w
    return SampledSignal(f, 0.0, dx)


WEAK_SLACK = 0.35


def weak_scan(Ns, trials: int, q: float, r: float, seed: int, grid: int = 1 << 14,
              n_lambda: int = 24, fam: MultiplierFamily | None = None, ks: KRange | None = None) -> ScanResult:
    """Corpus version of :func:`weak_type_scan`, normalised by ``A``.

    Each row's ``S`` is ``max_lam lam |{calV f > lam}| / (sqrt(N) ||f||_1 A)``.
    The fit uses ``sqrt(N)`` times the per-``N`` maximum, so the slope is
    compared against ``1/2 + WEAK_SLACK``.
    """
    _check_scan_args(Ns, trials, q, r)
    fam = _fam(fam)
    ks = _scan_range(grid, ks)
    band = grid / 4
    rows, per_N = [], {}
    for N in Ns:
        best = 0.0
        for t in range(trials):
            s = trial_seed(seed, t)
            rng = np.random.default_rng([s, N, 1])
            X = random_frequencies(rng, N, band)
            f = random_l1_signal(rng, X, grid)
            V = np.real(calV(f, X, ks, q, fam).samples)
            vmax = float(V.max())
            lams = vmax * np.logspace(-3, 0, n_lambda, endpoint=False)
            table = weak_type_scan(f, X, ks, q, lams, fam) if vmax > 0 else []
            A, sv = bracket_factor(X, ks, r, fam)
            S = max((row.ratio for row in table), default=0.0) / A
            rows.append(ScanRow(N, t, s, S, A, fam.D[0], fam.D[1], sv))
            best = max(best, S)
        per_N[N] = best
    scaled = [per_N[N] * math.sqrt(N) for N in per_N]
    slope, intercept = fit_slope(list(per_N), scaled)
    return ScanResult(rows, per_N, slope, intercept, 0.5, 0.5 + WEAK_SLACK,
                      extra={"C_max": max(per_N.values()) if per_N else None})
