"""Seeded test signals shared by the checks, the calibration run and the tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FrequencySet, SampledSignal, norm

CORPUS_NS = (1, 2, 4, 8, 16)
CORPUS_BASES = 10
XI_BAND = 64.0
# lambda in units of ||f||_1 / |domain|
LAMBDA_FACTOR = 4.0


@dataclass(frozen=True, eq=False)
class CzCase:
    base: int
    f: SampledSignal
    xi: FrequencySet
    lam: float

    @property
    def N(self) -> int:
        return self.xi.N


def base_signal(rng: np.random.Generator, M: int) -> SampledSignal:
    """Sum of 2 to 6 Gaussian bumps on ``[0, 1)``, half of them modulated."""
    x = np.arange(M) / M
    f = np.zeros(M, complex)
    for _ in range(int(rng.integers(2, 7))):
        c = rng.uniform(0.1, 0.9)
        w = 10 ** rng.uniform(-3.0, -1.3)
        a = rng.normal() + 1j * rng.normal()
        nu = rng.uniform(-64, 64) if rng.random() < 0.5 else 0.0
        f += a * np.exp(-0.5 * ((x - c) / w) ** 2 + 2j * np.pi * nu * x)
    return SampledSignal(f, 0.0, 1.0 / M)


def cz_corpus(seed: int = 0, M: int = 1 << 14, Ns=CORPUS_NS, bases: int = CORPUS_BASES) -> list[CzCase]:
    """``bases`` signals, each paired with a random frequency set for every ``N``."""
    cases = []
    for b in range(bases):
        f = base_signal(np.random.default_rng([seed, b]), M)
        lam = LAMBDA_FACTOR * norm(f, p=1) / f.period
        for N in Ns:
            rng = np.random.default_rng([seed, b, N])
            while True:
                xi = np.sort(rng.uniform(-XI_BAND, XI_BAND, N))
                if N == 1 or np.diff(xi).min() > 1e-3:
                    break
            cases.append(CzCase(b, f, FrequencySet(xi), lam))
    return cases
