"""Measured constants for the empirical harnesses.

The bounds frozen in the fixture are ``CAL_MARGIN`` times the largest value
seen in a seeded run; tests then re-measure with other seeds.
"""
from __future__ import annotations

import numpy as np

from . import czdecomp, multifreq
from .corpus import cz_corpus
from .grid import FrequencySet, SampledSignal
from .variation import VectorSequence

CAL_MARGIN = 1.25
CAL_SEED = 20240601
VETS_R, VETS_Q = 2.5, 4.0
EXP_GRID = 1024
CZ_FIXTURE_GRID = 1 << 12
CZ_FIXTURE_NS = (1, 4, 16)
WEAK_NS = (1, 2, 4, 8, 16)
WEAK_TRIALS = 10
SCAN_BUDGET_SECONDS = 300


def gap_frequencies(rng: np.random.Generator, N: int) -> FrequencySet:
    """``N`` frequencies near the origin with every gap at least 1."""
    xi = np.concatenate([[0.0], np.cumsum(1.0 + rng.exponential(2.0, N - 1))])
    return FrequencySet(xi - xi.mean() + rng.uniform(-1, 1))


def orthsums_sample(rng: np.random.Generator) -> float:
    N = int(rng.integers(2, 9))
    xi = gap_frequencies(rng, N)
    d = rng.normal(size=N) + 1j * rng.normal(size=N)
    return multifreq.orthsums_ratio(d, xi, EXP_GRID)


def vets_sample(rng: np.random.Generator, N: int) -> tuple[float, float]:
    xi = gap_frequencies(rng, N)
    K = int(rng.integers(2, 13))
    # a random walk in k, the natural shape of partial sums across scales
    steps = rng.normal(size=(K, N)) + 1j * rng.normal(size=(K, N))
    c = VectorSequence.from_values(np.cumsum(steps, axis=0))
    return (
        multifreq.vets_ratio(c, xi, VETS_R, VETS_Q, EXP_GRID),
        multifreq.mets_ratio(c, xi, VETS_R, EXP_GRID),
    )


def lepingle_sample(rng: np.random.Generator, M: int = 1 << 12) -> float:
    g = SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), 0.0, 1.0 / M)
    if rng.random() < 0.5:
        # red noise: more mass at low frequencies where the kernels overlap
        nu = np.fft.fftfreq(M, 1.0 / M)
        g = g.with_samples(np.fft.ifft(np.fft.fft(g.samples) / (1.0 + np.abs(nu))))
    ks = multifreq.KRange.for_grid(g)
    return multifreq.lepingle_ratio(g, ks, VETS_R)


def cz_fixture_cases():
    return cz_corpus(CAL_SEED, M=CZ_FIXTURE_GRID, Ns=CZ_FIXTURE_NS, bases=1)


def cz_fixture_diagnostics() -> list[dict]:
    rows = []
    for case in cz_fixture_cases():
        out = czdecomp.cz_decompose(case.f, case.xi, case.lam)
        rows.append({"N": case.N, "xi": [float(v) for v in case.xi.xi], "lambda": case.lam,
                     "diagnostics": out.diagnostics.as_dict()})
    return rows


def measure(seed: int, n_orth: int = 100, n_vets: int = 100, n_lep: int = 50) -> dict:
    """Largest observed harness ratios for one seed."""
    rng = np.random.default_rng(seed)
    orth = max(orthsums_sample(rng) for _ in range(n_orth))
    vets, mets = 0.0, 0.0
    for i in range(n_vets):
        v, m = vets_sample(rng, (2, 4, 8)[i % 3])
        vets, mets = max(vets, v), max(mets, m)
    lep = max(lepingle_sample(rng) for _ in range(n_lep))
    return {"orthsums": orth, "vets": vets, "mets": mets, "lepingle": lep}


def calibrate(seed: int = CAL_SEED) -> dict:
    """Run every harness once and freeze ``CAL_MARGIN`` times the maxima."""
    observed = measure(seed)
    weak = multifreq.weak_scan(WEAK_NS, WEAK_TRIALS, VETS_Q, VETS_R, seed)
    scan = multifreq.scaling_scan([2, 4, 8, 16, 32], 20, VETS_Q, VETS_R, seed)
    observed["weak_type"] = max(weak.per_N.values())
    return {
        "seed": seed,
        "margin": CAL_MARGIN,
        "observed": observed,
        "bounds": {k: CAL_MARGIN * v for k, v in observed.items()},
        "weak_scan": weak.fit_json(),
        "scaling_scan": scan.fit_json(),
        "runtime_budget_seconds": {"scaling_scan": SCAN_BUDGET_SECONDS},
        "D": list(multifreq.default_family().D),
        "cz_fixture": {"seed": CAL_SEED, "grid": CZ_FIXTURE_GRID, "cases": cz_fixture_diagnostics()},
    }

