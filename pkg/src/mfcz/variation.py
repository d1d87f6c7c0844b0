"""Exact r-variation norms, lambda-jump covers and the parent function.

All norms on vector values are Euclidean (``l^2`` on ``C^d``).  The
variation semi-norm is the supremum, over strictly increasing key
subsequences, of the ``l^r`` sum of consecutive differences.  It is a
maximum-weight path problem on the ordered keys and is solved exactly by
dynamic programming over key pairs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

BRUTEFORCE_MAX_LEN = 14


def _l2(v: np.ndarray) -> np.ndarray:
    """Euclidean norm over the last axis, scaled so tiny entries do not underflow."""
    a = np.abs(v)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * np.sqrt(np.sum((a / safe) ** 2, axis=-1))


@dataclass(frozen=True, eq=False)
class VectorSequence:
    """Values ``c_k`` in ``C^d`` at strictly increasing integer keys."""

    keys: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        keys = np.asarray(self.keys)
        if keys.ndim != 1:
            raise ValueError("keys must be one-dimensional")
        if keys.size and not np.issubdtype(keys.dtype, np.integer):
            if not np.all(keys == np.round(keys)):
                raise ValueError("keys must be integers")
        keys = keys.astype(np.int64)
        vals = np.asarray(self.values)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != keys.size:
            raise ValueError(
                f"values must have shape (len(keys), d), got {vals.shape} for {keys.size} keys"
            )
        if vals.shape[1] < 1:
            raise ValueError("values need dimension d >= 1")
        if keys.size > 1 and np.any(np.diff(keys) <= 0):
            raise ValueError("keys must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals = vals.astype(complex if np.iscomplexobj(vals) else float)
        keys.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, start: int = 1) -> "VectorSequence":
        vals = np.asarray(values)
        return cls(np.arange(start, start + vals.shape[0]), vals)

    @property
    def M(self) -> int:
        return self.keys.size

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.M

    def distances(self) -> np.ndarray:
        """Pairwise distances ``||c_i - c_j||`` as an ``(M, M)`` array."""
        return _l2(self.values[:, None, :] - self.values[None, :, :])

    def diameter(self) -> float:
        return float(self.distances().max()) if self.M else 0.0

    def sup_norm(self) -> float:
        return float(_l2(self.values).max())


def _as_sequence(s) -> VectorSequence:
    if isinstance(s, VectorSequence):
        return s
    return VectorSequence.from_values(np.asarray(s))


def _check_r(r: float):
    if not (r > 0):
        raise ValueError(f"variation exponent must be positive, got {r}")


def tilde_variation(s, r: float) -> float:
    """The variation semi-norm ``sup (sum ||c_{k_j} - c_{k_{j-1}}||^r)^(1/r)``.

    Exact for every ``r > 0`` (including ``r < 1``) and ``r = inf``.
    """
    s = _as_sequence(s)
    if s.M == 0:
        raise ValueError("variation of an empty sequence is undefined")
    _check_r(r)
    if s.M == 1:
        return 0.0
    D = s.distances()
    if math.isinf(r):
        return float(D.max())
    scale = D.max()
    if scale == 0:
        return 0.0
    # best[j]: maximal sum of r-th powers over chains ending at j (in units of the diameter)
    W = (D / scale) ** r
    best = np.zeros(s.M)
    for j in range(1, s.M):
        best[j] = np.max(best[:j] + W[:j, j])
    return float(scale * best.max() ** (1.0 / r))


def variation(s, r: float) -> float:
    """The variation norm: sup of ``||c_k||`` plus :func:`tilde_variation`."""
    s = _as_sequence(s)
    if s.M == 0:
        raise ValueError("variation of an empty sequence is undefined")
    return s.sup_norm() + tilde_variation(s, r)


def tilde_variation_bruteforce(s, r: float) -> float:
    """Enumerate every increasing subsequence; oracle for :func:`tilde_variation`."""
    s = _as_sequence(s)
    if s.M == 0:
        raise ValueError("variation of an empty sequence is undefined")
    if s.M > BRUTEFORCE_MAX_LEN:
        raise ValueError(f"brute force is limited to {BRUTEFORCE_MAX_LEN} keys, got {s.M}")
    _check_r(r)
    vals = s.values
    best = 0.0
    for size in range(2, s.M + 1):
        for idx in itertools.combinations(range(s.M), size):
            steps = [math.hypot(*np.abs(vals[b] - vals[a])) for a, b in zip(idx, idx[1:])]
            if math.isinf(r):
                best = max(best, max(steps))
            else:
                best = max(best, sum(t**r for t in steps))
    return best if math.isinf(r) else best ** (1.0 / r)


def tilde_variation_batch(values: np.ndarray, r: float) -> np.ndarray:
    """Variation semi-norm of many sequences at once.

    ``values`` has shape ``(P, K)`` (scalar sequences) or ``(P, K, d)``;
    the key axis is 1.  Returns an array of length ``P``.
    """
    _check_r(r)
    v = np.asarray(values)
    if v.ndim == 2:
        v = v[:, :, None]
    P, K = v.shape[:2]
    if K == 0:
        raise ValueError("variation of an empty sequence is undefined")
    if K == 1:
        return np.zeros(P)
    if math.isinf(r):
        out = np.zeros(P)
        for j in range(1, K):
            dist = _l2(v[:, :j, :] - v[:, j : j + 1, :])
            out = np.maximum(out, dist.max(axis=1))
        return out
    # per-sequence scale keeps r-th powers of tiny or huge steps representable
    scale = _l2(v).max(axis=1) * 2.0
    safe = np.where(scale > 0, scale, 1.0)[:, None]
    best = np.zeros((P, K))
    for j in range(1, K):
        w = (_l2(v[:, :j, :] - v[:, j : j + 1, :]) / safe) ** r
        best[:, j] = np.max(best[:, :j] + w, axis=1)
    return scale * best.max(axis=1) ** (1.0 / r)


def variation_batch(values: np.ndarray, r: float) -> np.ndarray:
    """Variation norm of many sequences at once (see :func:`tilde_variation_batch`)."""
    v = np.asarray(values)
    mags = np.abs(v) if v.ndim == 2 else _l2(v)
    return mags.max(axis=1) + tilde_variation_batch(v, r)


@dataclass(frozen=True)
class JumpCover:
    lam: float
    indices: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.indices)


def _cover_positions(vals: np.ndarray, lam: float) -> list[int]:
    # ties (distance exactly lam) stay inside the closed ball
    pos = [0]
    anchor = vals[0]
    dist = _l2(vals - anchor)
    start = 1
    while True:
        out = np.nonzero(dist[start:] > lam)[0]
        if out.size == 0:
            return pos
        p = start + int(out[0])
        pos.append(p)
        anchor = vals[p]
        dist = _l2(vals - anchor)
        start = p + 1


def jump_cover(s, lam: float) -> JumpCover:
    """Greedy lambda-jump cover.

    Starts at the first key and repeatedly moves to the first later key whose
    value lies outside the closed ``lam``-ball around the current anchor.
    """
    s = _as_sequence(s)
    if s.M == 0:
        raise ValueError("jump cover of an empty sequence is undefined")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    pos = _cover_positions(s.values, lam)
    return JumpCover(float(lam), tuple(int(s.keys[p]) for p in pos))


def min_distinct_distance(s) -> float:
    """Smallest distance between two distinct values (inf if all values agree)."""
    s = _as_sequence(s)
    D = s.distances()
    pos = D[D > 0]
    return float(pos.min()) if pos.size else math.inf


@dataclass(frozen=True, eq=False)
class ParentTable:
    """``rho[n + 1, i]`` is the key ``rho(n, k_i)`` for ``n = -1 .. n_max``."""

    lambda0: float
    keys: np.ndarray
    rho: np.ndarray

    @property
    def n_max(self) -> int:
        return self.rho.shape[0] - 2

    def __call__(self, n: int, k: int) -> int:
        i = int(np.searchsorted(self.keys, k))
        if i >= self.keys.size or self.keys[i] != k:
            raise KeyError(k)
        if n < -1:
            raise IndexError(n)
        # the table is constant past n_max
        row = min(n, self.n_max) + 1
        return int(self.rho[row, i])


def parent_table(s, lambda0: float) -> ParentTable:
    """Recursive parent function built from the ``2**n * lambda0`` jump covers.

    ``rho(-1, k) = k`` and ``rho(n+1, k)`` is the last index of the
    ``2**(n+1) * lambda0`` cover that does not exceed ``rho(n, k)``.  Rows run
    up to the first ``n`` with ``2**n * lambda0 >= diameter``, where every
    entry equals the first key.
    """
    s = _as_sequence(s)
    if s.M == 0:
        raise ValueError("parent table of an empty sequence is undefined")
    dmin = min_distinct_distance(s)
    if not (0 < lambda0 < dmin):
        raise ValueError(
            f"lambda0 must lie in (0, {dmin!r}) (the minimal distance between distinct values), got {lambda0}"
        )
    diam = s.diameter()
    n_max = 0
    while math.ldexp(lambda0, n_max) < diam:
        n_max += 1
    rows = [np.arange(s.M)]
    for n in range(0, n_max + 1):
        cover = np.asarray(_cover_positions(s.values, math.ldexp(lambda0, n)))
        # m with cover[m] <= rho(n-1, k) < cover[m+1]
        m = np.searchsorted(cover, rows[-1], side="right") - 1
        rows.append(cover[m])
    rho = s.keys[np.vstack(rows)]
    rho.setflags(write=False)
    return ParentTable(float(lambda0), s.keys, rho)


def rm_block(l: int, m: int) -> range:
    """Block ``beta_{l,m}``: empty when ``l`` sits in the left child of its
    dyadic parent of length ``2**(m+1)``, otherwise that left child.

    For ``0 <= l < 2**M`` the blocks ``m = 0 .. M-1`` partition ``range(l)``.
    """
    if l < 0 or m < 0:
        raise ValueError("rm_block needs l >= 0 and m >= 0")
    if not (l >> m) & 1:
        return range(0)
    start = (l >> (m + 1)) << (m + 1)
    return range(start, start + (1 << m))
