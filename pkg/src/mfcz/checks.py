"""Self-contained invariant suite run by ``mfcz check``.

Every property draws its inputs from a generator seeded by ``(seed, name)``
and returns ``None`` on success or a failure message.
"""
from __future__ import annotations

import dataclasses
import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import czdecomp, expspan, grid, multifreq, variation
from .corpus import cz_corpus

FAULTS = ("b_I",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    seed: int
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = f" seed={self.seed}" + (f" {self.detail}" if self.detail else "")
        return f"{status} {self.name}" + ("" if self.passed else tail)


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _random_sequence(rng, max_len=10, d=None):
    M = int(rng.integers(1, max_len + 1))
    d = d if d is not None else int(rng.choice([1, 3]))
    vals = rng.normal(size=(M, d))
    if rng.random() < 0.5:
        vals = vals + 1j * rng.normal(size=(M, d))
    return variation.VectorSequence(np.sort(rng.choice(100, M, replace=False)), vals)


def variation_oracle(rng, fault):
    for _ in range(60):
        s = _random_sequence(rng)
        r = float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf]))
        a, b = variation.tilde_variation(s, r), variation.tilde_variation_bruteforce(s, r)
        if abs(a - b) > 1e-12 * max(1.0, b):
            return f"DP {a!r} != brute force {b!r} (r={r})"


def jump_cover_inequality(rng, fault):
    for _ in range(300):
        s = _random_sequence(rng, 30)
        r = float(rng.uniform(1.0, 4.0))
        lam = float(rng.uniform(0.05, 3.0))
        L = variation.jump_cover(s, lam).count
        if lam * (L - 1) ** (1 / r) > variation.variation(s, r):
            return f"lambda (L-1)^(1/r) exceeds V^r for lam={lam}, r={r}"


def parent_table_identities(rng, fault):
    for _ in range(50):
        s = _random_sequence(rng, 30)
        dmin = variation.min_distinct_distance(s)
        if not math.isfinite(dmin):
            continue
        lam0 = float(rng.uniform(0.1, 0.9)) * dmin
        t = variation.parent_table(s, lam0)
        vals = {int(k): s.values[i] for i, k in enumerate(s.keys)}
        for i, k in enumerate(s.keys):
            total = vals[int(t.rho[-1, i])].copy()
            for n in range(-1, t.n_max):
                step = vals[t(n, int(k))] - vals[t(n + 1, int(k))]
                if np.linalg.norm(step) > math.ldexp(lam0, n + 1):
                    return f"parent step exceeds 2^(n+1) lambda0 at n={n}, k={k}"
                total = total + step
            if np.max(np.abs(total - vals[int(k)])) > 1e-12 * (1 + np.abs(vals[int(k)]).max()):
                return f"telescoping sum misses c_k at k={k}"
        if np.any(np.diff(t.rho, axis=1) < 0) or np.any(np.diff(t.rho, axis=0) > 0):
            return "parent table is not monotone"


def rm_block_partition(rng, fault):
    for l in range(1 << 10):
        got = sorted(i for m in range(10) for i in variation.rm_block(l, m))
        if got != list(range(l)):
            return f"blocks for l={l} do not partition [0, l)"


def be_ratio_bound(rng, fault):
    for _ in range(20):
        N = int(rng.integers(1, 9))
        xi = np.sort(rng.choice(np.arange(0, 65, 0.25), N, replace=False))
        a = float(rng.uniform(-4, 4))
        L = float(rng.choice([0.25, 1.0, 8.0]))
        ratio = expspan.be_ratio(grid.Interval(a, a + L), xi)
        if ratio > 1 + 1e-6:
            return f"normalized ratio {ratio} > 1 for N={N}"


def cz_invariants(rng, fault):
    cases = cz_corpus(int(rng.integers(1 << 32)), M=1 << 11, Ns=(1, 4, 16), bases=2)
    for case in cases:
        out = czdecomp.cz_decompose(case.f, case.xi, case.lam, verify=False)
        if fault == "b_I" and out.pieces:
            p = out.pieces[0]
            b = p.b_I.samples.copy()
            j = p.size + p.size // 2
            b[j] += 1e-4 * (1 + grid.norm(p.f_I, p=1)) / p.b_I.dx
            out.pieces[0] = dataclasses.replace(p, b_I=p.b_I.with_samples(b))
        try:
            czdecomp.verify_bounds(out, case.f)
        except czdecomp.InvariantViolation as exc:
            return f"{', '.join(exc.names)} (base {case.base}, N={case.N})"


def multiplier_support(rng, fault):
    fam = multifreq.default_family()
    for _ in range(10000 // 100):
        w = grid.DyadicInterval(int(rng.integers(-6, 7)), int(rng.integers(-50, 50)))
        I = w.interval
        xi = np.concatenate([rng.uniform(I.a - 3 * w.length, I.a, 50), rng.uniform(I.b, I.b + 3 * w.length, 50)])
        if np.any(fam.phi_hat(w, xi) != 0):
            return f"phi_hat nonzero outside {I}"


def delta_plancherel(rng, fault):
    fam = multifreq.default_family()
    M = 1 << 12
    f = grid.SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), 0.0, 1.0 / M)
    X = grid.FrequencySet(np.sort(rng.choice(np.arange(-M // 2, M // 2), 8, replace=False)))
    for k in multifreq.KRange.for_grid(f):
        lhs = grid.norm(multifreq.delta_k(f, X, k, fam), p=2)
        if lhs > fam.D[0] * grid.norm(f, p=2) * (1 + 1e-8):
            return f"||Delta_k f|| exceeds D_0 ||f|| at k={k}"


def calv_homogeneity(rng, fault):
    M = 1 << 10
    f = grid.SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), 0.0, 1.0 / M)
    X = grid.FrequencySet(np.sort(rng.uniform(-200, 200, 4)))
    ks = multifreq.KRange.for_grid(f)
    c = complex(rng.normal(), rng.normal())
    V1 = np.real(multifreq.calV(f, X, ks, 4.0).samples)
    V2 = np.real(multifreq.calV(c * f, X, ks, 4.0).samples)
    if np.max(np.abs(V2 - abs(c) * V1)) > 1e-10 * (1 + V1.max()):
        return "calV is not 1-homogeneous"


def mets_below_vets(rng, fault):
    for _ in range(20):
        N = int(rng.integers(1, 6))
        xi = np.sort(rng.choice(np.arange(-20, 21), N, replace=False)).astype(float)
        K = int(rng.integers(2, 8))
        c = variation.VectorSequence.from_values(rng.normal(size=(K, N)) + 1j * rng.normal(size=(K, N)))
        sup = multifreq.exp_sum_lhs(c, xi, None, 256)
        var = multifreq.exp_sum_lhs(c, xi, 4.0, 256)
        if sup > var * (1 + 1e-12):
            return "sup over k exceeds the q-variation"


def dft_plancherel(rng, fault):
    M = 1 << 10
    f = grid.SampledSignal(rng.normal(size=M) + 1j * rng.normal(size=M), float(rng.uniform(-1, 1)), 1.0 / M)
    F = grid.dft(f)
    back = grid.idft(F, f.x0, f.dx)
    if np.max(np.abs(back.samples - f.samples)) > 1e-10 * np.abs(f.samples).max():
        return "DFT round trip failed"
    lhs = np.sum(np.abs(F) ** 2) / f.period
    if abs(lhs - grid.norm(f, p=2) ** 2) > 1e-10 * lhs:
        return "Plancherel identity failed"


PROPERTIES: dict[str, Callable] = {
    "variation_dp_equals_bruteforce": variation_oracle,
    "jump_cover_inequality": jump_cover_inequality,
    "parent_table_identities": parent_table_identities,
    "rm_block_partition": rm_block_partition,
    "be_ratio_bound": be_ratio_bound,
    "cz_exact_invariants": cz_invariants,
    "multiplier_support": multiplier_support,
    "delta_plancherel": delta_plancherel,
    "calv_homogeneity": calv_homogeneity,
    "mets_below_vets": mets_below_vets,
    "dft_plancherel": dft_plancherel,
}


def run_checks(seed: int = 0, inject_fault: str | None = None, names=None) -> list[CheckResult]:
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}; choose from {', '.join(FAULTS)}")
    results = []
    for name, prop in PROPERTIES.items():
        if names is not None and name not in names:
            continue
        detail = prop(_rng(seed, name), inject_fault)
        results.append(CheckResult(name, detail is None, seed, detail or ""))
    return results
