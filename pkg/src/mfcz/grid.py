"""Sampled signals on uniform grids, intervals, quadrature and DFT multipliers.

Conventions used throughout the package:

* A grid signal lives on ``[x0, x0 + M*dx)`` with samples at ``x0 + i*dx``.
  It is zero outside that window for quadrature, and periodic with period
  ``M*dx`` for DFT operations.
* Integrals are left-endpoint rectangle sums ``dx * sum f(x_i)``.
* Frequencies are in cycles per unit length: a pure frequency ``xi`` is the
  function ``exp(2*pi*i*xi*x)``.  User supplied ``xi`` values are always read
  in this ``2*pi`` convention.
* The DFT carries weight ``dx`` in the forward direction and ``1/(M*dx)`` in
  the inverse, so it approximates the continuous Fourier transform
  ``F(nu) = int f(x) exp(-2*pi*i*nu*x) dx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# grid index rounding slack, in units of dx
_SNAP = 1e-9


@dataclass(frozen=True)
class Interval:
    """Half-open interval ``[a, b)``."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"interval endpoints must be finite, got [{self.a}, {self.b})")
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    def dilate(self, c: float) -> "Interval":
        """Same center, ``c`` times the length."""
        half = 0.5 * c * self.length
        return Interval(self.center - half, self.center + half)

    def contains(self, other: "Interval") -> bool:
        return self.a <= other.a and other.b <= self.b

    def intersects(self, other: "Interval") -> bool:
        return self.a < other.b and other.a < self.b


@dataclass(frozen=True)
class DyadicInterval:
    """The interval ``[2**k * n, 2**k * (n + 1))``."""

    k: int
    n: int

    @property
    def length(self) -> float:
        return math.ldexp(1.0, self.k)

    @property
    def interval(self) -> Interval:
        return Interval(math.ldexp(self.n, self.k), math.ldexp(self.n + 1, self.k))

    @classmethod
    def containing(cls, x: float, k: int) -> "DyadicInterval":
        return cls(k, math.floor(math.ldexp(x, -k)))

    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.k + 1, self.n >> 1)


class FrequencySet:
    """Strictly increasing real frequencies ``xi_1 < ... < xi_N``.

    Frequencies are in cycles per unit length (the ``exp(2*pi*i*xi*x)``
    convention).  Gaps below ``min_gap`` are rejected rather than merged.
    """

    def __init__(self, xi, min_gap: float = 0.0):
        arr = np.atleast_1d(np.asarray(xi, dtype=float)).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a frequency set needs at least one frequency")
        if not np.all(np.isfinite(arr)):
            raise ValueError("frequencies must be finite")
        gaps = np.diff(arr)
        if np.any(gaps <= 0):
            raise ValueError(f"frequencies must be strictly increasing, got {arr.tolist()}")
        if gaps.size and gaps.min() < min_gap:
            raise ValueError(
                f"frequency gap {gaps.min():.3e} is below the minimum {min_gap:.3e}"
            )
        arr.setflags(write=False)
        self._xi = arr

    @property
    def xi(self) -> np.ndarray:
        return self._xi

    @property
    def N(self) -> int:
        return self._xi.size

    @property
    def min_gap(self) -> float:
        return float(np.diff(self._xi).min()) if self.N > 1 else math.inf

    def scaled(self, s: float) -> "FrequencySet":
        return FrequencySet(self._xi * s)

    def shifted(self, eta: float) -> "FrequencySet":
        return FrequencySet(self._xi + eta)

    def __len__(self):
        return self.N

    def __iter__(self):
        return iter(self._xi.tolist())

    def __eq__(self, other):
        return isinstance(other, FrequencySet) and np.array_equal(self._xi, other._xi)

    def __hash__(self):
        return hash(self._xi.tobytes())

    def __repr__(self):
        return f"FrequencySet({self._xi.tolist()})"


def as_frequency_set(xi) -> FrequencySet:
    return xi if isinstance(xi, FrequencySet) else FrequencySet(xi)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples at ``x0 + i*dx`` for ``i = 0 .. M-1``."""

    samples: np.ndarray
    x0: float = 0.0
    dx: float = 1.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).ravel()
        if s.size < 1:
            raise ValueError("a signal needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal samples must be finite")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise ValueError(f"grid spacing must be positive, got {self.dx}")
        if not math.isfinite(self.x0):
            raise ValueError("x0 must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], x0: float, dx: float, M: int):
        x = x0 + dx * np.arange(M)
        return cls(np.broadcast_to(func(x), (M,)), x0, dx)

    @classmethod
    def zeros(cls, M: int, x0: float = 0.0, dx: float = 1.0):
        return cls(np.zeros(M, dtype=complex), x0, dx)

    @property
    def M(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.M)

    @property
    def domain(self) -> Interval:
        return Interval(self.x0, self.x0 + self.M * self.dx)

    @property
    def period(self) -> float:
        return self.M * self.dx

    def with_samples(self, samples) -> "SampledSignal":
        return SampledSignal(samples, self.x0, self.dx)

    def same_grid(self, other: "SampledSignal") -> bool:
        return self.M == other.M and self.x0 == other.x0 and self.dx == other.dx

    def index_range(self, J: Interval) -> tuple[int, int]:
        """Indices ``lo:hi`` of the grid points lying in ``J`` (clipped to the grid)."""
        return index_range(self.x0, self.dx, self.M, J)

    def __add__(self, other):
        _check_grid(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other):
        _check_grid(self, other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, alpha):
        return self.with_samples(self.samples * alpha)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)


def _check_grid(f: SampledSignal, g: SampledSignal):
    if not f.same_grid(g):
        raise ValueError("signals live on different grids")


def index_range(x0: float, dx: float, M: int, J: Interval) -> tuple[int, int]:
    lo = math.ceil((J.a - x0) / dx - _SNAP)
    hi = math.ceil((J.b - x0) / dx - _SNAP)
    lo = min(max(lo, 0), M)
    hi = min(max(hi, lo), M)
    return lo, hi


def integrate(f: SampledSignal, J: Interval | None = None) -> complex:
    """Rectangle-rule integral of ``f`` over ``J`` (whole grid when ``J`` is None)."""
    lo, hi = (0, f.M) if J is None else f.index_range(J)
    return complex(f.dx * f.samples[lo:hi].sum())


def norm(f: SampledSignal, J: Interval | None = None, p: float = 2.0) -> float:
    """Discrete ``L^p(J)`` norm, ``p`` in ``[1, inf]``."""
    if not p >= 1:
        raise ValueError(f"norm exponent must be >= 1 or inf, got {p}")
    lo, hi = (0, f.M) if J is None else f.index_range(J)
    a = np.abs(f.samples[lo:hi])
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(f.dx * a.sum())
    if p == 2:
        return float(math.sqrt(f.dx) * np.linalg.norm(a))
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * (f.dx * np.sum((a / scale) ** p)) ** (1.0 / p))


def restrict(f: SampledSignal, J: Interval) -> SampledSignal:
    """``f`` times the indicator of ``J``, on the same grid."""
    lo, hi = f.index_range(J)
    out = np.zeros(f.M, dtype=complex)
    out[lo:hi] = f.samples[lo:hi]
    return f.with_samples(out)


def frequencies(M: int, dx: float) -> np.ndarray:
    """DFT frequencies ``m / (M*dx)`` in numpy FFT order.

    For even ``M`` these are exactly ``m`` in ``[-M/2, M/2)``.
    """
    return np.fft.fftfreq(M, dx)


def dft(f: SampledSignal) -> np.ndarray:
    """``F(nu_m) = dx * sum_i f(x_i) exp(-2 pi i nu_m x_i)`` in FFT order."""
    nu = frequencies(f.M, f.dx)
    return f.dx * np.fft.fft(f.samples) * np.exp(-2j * np.pi * nu * f.x0)


def idft(F: np.ndarray, x0: float, dx: float) -> SampledSignal:
    """Inverse of :func:`dft`."""
    F = np.asarray(F, dtype=complex)
    M = F.size
    nu = frequencies(M, dx)
    return SampledSignal(np.fft.ifft(F * np.exp(2j * np.pi * nu * x0)) / dx, x0, dx)


def apply_multiplier(f: SampledSignal, symbol) -> SampledSignal:
    """Fourier multiplier on the periodic grid.

    ``symbol`` is either a callable evaluated at the DFT frequencies or an
    array already sampled there (FFT order).
    """
    if callable(symbol):
        sym = np.asarray(symbol(frequencies(f.M, f.dx)))
    else:
        sym = np.asarray(symbol)
    sym = np.broadcast_to(sym, (f.M,))
    # the x0 phase commutes with a diagonal symbol
    return f.with_samples(np.fft.ifft(sym * np.fft.fft(f.samples)))


def apply_multipliers(f: SampledSignal, symbols: np.ndarray) -> np.ndarray:
    """Batch version: ``symbols`` has shape ``(K, M)``; returns ``(K, M)`` samples."""
    F = np.fft.fft(f.samples)
    return np.fft.ifft(np.asarray(symbols) * F[None, :], axis=-1)


def mode(nu: float, x0: float, dx: float, M: int, amplitude: complex = 1.0) -> SampledSignal:
    """The pure frequency ``amplitude * exp(2 pi i nu x)`` sampled on a grid."""
    return SampledSignal.from_function(lambda x: amplitude * np.exp(2j * np.pi * nu * x), x0, dx, M)
