"""Finite spans of complex exponentials on an interval.

The projection span is ``span{exp(-2 pi i xi_l y)}``.  Pairing an element
``g = sum_l c_l exp(-2 pi i xi_l y)`` with ``exp(2 pi i xi_j y)`` gives
``sum_l B_jl c_l`` with the Hermitian Gram matrix
``B_jl = int_J exp(2 pi i (xi_j - xi_l) y) dy``, so matching the unconjugated
moments ``m_j = int_J f(y) exp(2 pi i xi_j y) dy`` is the linear system
``B c = m``.  Its solution is the minimal-norm function with the moments of
``f``, i.e. the orthogonal projection of ``f`` onto the span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import FrequencySet, Interval, SampledSignal, as_frequency_set, index_range

COND_LIMIT = 1e12
EIG_CUTOFF = 1e-12
# frequencies closer than this (times 1/|J|) are treated as coincident
COINCIDENT_GAP = 1e-9


def _check_gaps(J: Interval, xi: FrequencySet):
    if xi.N > 1 and xi.min_gap * J.length < COINCIDENT_GAP:
        raise ValueError(
            f"frequencies {xi.min_gap:.3e} apart are indistinguishable on an interval of length {J.length}"
        )


def _kernel(delta: np.ndarray, J: Interval) -> np.ndarray:
    # int_a^b exp(2 pi i delta y) dy in a form that is stable as delta -> 0
    L = J.length
    return L * np.exp(2j * np.pi * delta * J.center) * np.sinc(delta * L)


def gram(J: Interval, xi) -> np.ndarray:
    """Closed-form Gram matrix ``B_jl = int_J exp(2 pi i (xi_j - xi_l) y) dy``."""
    xi = as_frequency_set(xi)
    _check_gaps(J, xi)
    delta = xi.xi[:, None] - xi.xi[None, :]
    B = _kernel(delta, J)
    # exact symmetry: fill the upper triangle from the lower one
    iu = np.triu_indices(xi.N, 1)
    B[iu] = np.conj(B.T[iu])
    np.fill_diagonal(B, J.length)
    return B


def discrete_gram(J: Interval, xi, x0: float, dx: float, M: int | None = None) -> np.ndarray:
    """Rectangle-rule Gram ``dx * sum_{x_i in J} exp(2 pi i (xi_j - xi_l) x_i)``.

    Geometric sums in closed form (Dirichlet kernel); this is the Gram matrix
    that makes moment matching exact for sampled signals.
    """
    xi = as_frequency_set(xi)
    M = M if M is not None else 1 << 62
    lo, hi = index_range(x0, dx, M, J)
    n = hi - lo
    delta = xi.xi[:, None] - xi.xi[None, :]
    first = x0 + lo * dx
    mid = first + 0.5 * (n - 1) * dx
    num = np.sin(np.pi * delta * n * dx)
    den = np.sin(np.pi * delta * dx)
    small = np.abs(den) < 1e-300
    ratio = np.where(small, float(n), num / np.where(small, 1.0, den))
    B = dx * np.exp(2j * np.pi * delta * mid) * ratio
    iu = np.triu_indices(xi.N, 1)
    B[iu] = np.conj(B.T[iu])
    np.fill_diagonal(B, n * dx)
    return B


def gram_condition(B: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(B)
    if ev[-1] <= 0:
        return math.inf
    return math.inf if ev[0] <= 0 else float(ev[-1] / ev[0])


def moments(f: SampledSignal, J: Interval, xi) -> np.ndarray:
    """``m_j = dx * sum_{x_i in J} f(x_i) exp(2 pi i xi_j x_i)``."""
    xi = as_frequency_set(xi)
    lo, hi = f.index_range(J)
    if hi <= lo:
        return np.zeros(xi.N, dtype=complex)
    x = f.x[lo:hi]
    E = np.exp(2j * np.pi * np.outer(xi.xi, x))
    return f.dx * (E @ f.samples[lo:hi])


@dataclass(frozen=True, eq=False)
class Projection:
    """Result of :func:`riesz_project`.

    ``g`` lives on the sub-grid covering ``J`` and vanishes outside it;
    ``coeffs`` are the ``c_l`` with ``g = sum_l c_l exp(-2 pi i xi_l y)``.
    """

    g: SampledSignal
    coeffs: np.ndarray
    moments: np.ndarray
    residual: float
    condition: float
    regularized: bool
    rank: int


def _project(f_loc: np.ndarray, x: np.ndarray, dx: float, xi: np.ndarray, rcond: float | None):
    # columns sqrt(dx) * exp(-2 pi i xi_l x_i): an orthonormal basis of their
    # range from the SVD gives a backward-stable projection even when the
    # Gram matrix is numerically singular
    A = math.sqrt(dx) * np.exp(-2j * np.pi * np.outer(x, xi))
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    if smax == 0:
        return np.zeros_like(f_loc), np.zeros(xi.size, complex), math.inf, 0
    # fewer sample points than frequencies: the discrete Gram matrix is singular
    singular = A.shape[0] < A.shape[1] or s[-1] == 0
    cond = math.inf if singular else float((smax / s[-1]) ** 2)
    tol = rcond if rcond is not None else max(A.shape) * np.finfo(float).eps
    keep = s > tol * smax
    Ur, sr, Vr = U[:, keep], s[keep], Vh[keep].conj().T
    h = math.sqrt(dx) * f_loc
    proj = Ur.conj().T @ h
    g = (Ur @ proj) / math.sqrt(dx)
    coeffs = Vr @ (proj / sr)
    return g, coeffs, cond, int(keep.sum())


def riesz_project(f_I: SampledSignal, J: Interval, xi, rcond: float | None = None) -> Projection:
    """Minimal-norm function on ``J`` sharing the ``xi``-moments of ``f_I``.

    The returned ``g`` is supported on the grid points of ``J``.  Moments are
    matched for the rectangle-rule quadrature of the grid, i.e. against the
    discrete Gram matrix.  When the Gram condition number exceeds
    ``COND_LIMIT`` the projection is taken onto the numerically resolved part
    of the span and flagged as regularized; ``rcond`` (relative to the largest
    singular value of the sampled basis) sets that cut-off, defaulting to
    machine precision so that the moment residual stays at rounding level.
    """
    xi = as_frequency_set(xi)
    _check_gaps(J, xi)
    lo, hi = f_I.index_range(J)
    if hi <= lo:
        raise ValueError("projection interval contains no grid points")
    x = f_I.x[lo:hi]
    f_loc = np.asarray(f_I.samples[lo:hi])
    sub = SampledSignal.zeros(hi - lo, x[0], f_I.dx)
    m = moments(f_I, J, xi)
    outside = f_I.dx * (np.abs(f_I.samples[:lo]).sum() + np.abs(f_I.samples[hi:]).sum())
    if outside > 0:
        raise ValueError("f_I must vanish outside the projection interval")
    if not np.any(f_loc):
        return Projection(sub, np.zeros(xi.N, complex), m, 0.0, math.nan, False, 0)
    g, coeffs, cond, rank = _project(f_loc, x, f_I.dx, xi.xi, rcond)
    g_sig = SampledSignal(g, x[0], f_I.dx)
    res = moment_residual(f_I, g_sig, J, xi)
    return Projection(g_sig, coeffs, m, res, cond, bool(cond > COND_LIMIT), rank)


def moment_residual(f: SampledSignal, g: SampledSignal, J: Interval, xi) -> float:
    """``max_j |m_j(f) - m_j(g)|`` on ``J``."""
    return float(np.max(np.abs(moments(f, J, xi) - moments(g, J, xi))))


@dataclass(frozen=True)
class KernelBound:
    ratio: float
    condition: float
    regularized: bool


_GL_T, _GL_W = np.polynomial.legendre.leggauss(32)


def _gauss_nodes(J: Interval, spread: float) -> tuple[np.ndarray, np.ndarray]:
    # composite 32-point Gauss-Legendre, at most ~2 oscillations per panel
    panels = int(math.ceil(spread * J.length / 2.0)) + 1
    h = J.length / panels
    centers = J.a + h * (np.arange(panels) + 0.5)
    y = (centers[:, None] + 0.5 * h * _GL_T[None, :]).ravel()
    w = np.tile(0.5 * h * _GL_W, panels)
    return y, w


def be_kernel_bound(I: Interval, xi, eval_points: int = 4096) -> KernelBound:
    """Normalized evaluation-kernel bound of the exponential span.

    Computes ``max_x sqrt(K(x)) * sqrt(|I| / N)`` over ``eval_points``
    equispaced ``x`` in ``I``, where ``K(x) = e^T B^{-1} conj(e)`` with
    ``B = gram(3I, xi)`` and ``e_j = exp(-2 pi i xi_j x)`` is the largest
    value of ``|v(x)|^2 / ||v||^2_{L^2(3I)}`` over the span.  The result is
    that supremum divided by ``sqrt(N/|I|)``.

    Evaluated through an SVD of the Gauss-Legendre sampled basis on ``3I``
    (whose Gram matrix equals ``B`` to rounding) so that its accuracy
    degrades like the square root of the Gram condition number.
    """
    xi = as_frequency_set(xi)
    if eval_points < 64:
        raise ValueError(f"need at least 64 evaluation points, got {eval_points}")
    J = I.dilate(3.0)
    _check_gaps(J, xi)
    # centring the frequencies only changes the basis by a unimodular factor
    shift = 0.5 * (xi.xi[0] + xi.xi[-1])
    nu = xi.xi - shift
    y, w = _gauss_nodes(J, xi.xi[-1] - xi.xi[0])
    A = np.sqrt(w)[:, None] * np.exp(-2j * np.pi * np.outer(y, nu))
    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    cond = math.inf if s[-1] == 0 else float((s[0] / s[-1]) ** 2)
    regularized = cond > COND_LIMIT
    keep = s**2 > EIG_CUTOFF * s[0] ** 2 if regularized else np.ones(s.size, bool)
    x = I.a + I.length * np.arange(eval_points) / eval_points
    E = np.exp(-2j * np.pi * np.outer(x, nu))
    # |v(x)|^2 / ||v||^2 maximised over v: sum_k |(E V)_k|^2 / s_k^2
    proj = E @ Vh[keep].conj().T
    kern = np.sum(np.abs(proj / s[keep]) ** 2, axis=1)
    ratio = math.sqrt(float(kern.max())) * math.sqrt(I.length / xi.N)
    return KernelBound(ratio, cond, bool(regularized))


def be_ratio(I: Interval, xi, eval_points: int = 4096) -> float:
    """See :func:`be_kernel_bound`; at most 1 up to conditioning error."""
    return be_kernel_bound(I, xi, eval_points).ratio


def kernel_diagonal(J: Interval, xi, x: np.ndarray) -> np.ndarray:
    """Reproducing-kernel diagonal ``sup |v(x)|^2 / ||v||^2_{L^2(J)}`` from the closed-form Gram.

    For the span of ``exp(-2 pi i xi_l y)`` this is ``e^T B^{-1} conj(e)`` with
    ``e_j = exp(-2 pi i xi_j x)``.  Direct solve; meant for well-conditioned
    cases and as a cross-check of :func:`be_kernel_bound`.
    """
    xi = as_frequency_set(xi)
    B = gram(J, xi)
    E = np.exp(-2j * np.pi * np.outer(xi.xi, np.atleast_1d(x)))
    sol = np.linalg.solve(B, E.conj())
    return np.real(np.sum(E * sol, axis=0))
