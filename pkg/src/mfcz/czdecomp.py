"""Multi-frequency Calderon-Zygmund decomposition of sampled signals.

Pipeline: zero-pad the signal, take a dyadic-length maximal function, form
the level set ``E = {Mf > lambda / sqrt(N)}``, select the maximal grid-aligned
dyadic intervals ``I`` with ``6I`` inside ``E``, and on each ``3I`` replace
``f_I`` by its projection onto the exponential span.  The bad pieces
``b_I = f_I - g_I`` then have vanishing moments against every frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d

from . import expspan
from .grid import FrequencySet, Interval, SampledSignal, as_frequency_set, norm

PAD_FACTOR = 8
MOMENT_TOL = 1e-8
RECON_TOL = 1e-12


class InvariantViolation(AssertionError):
    """An exactly provable property of a decomposition failed.

    ``names`` lists every violated invariant, most specific first.
    """

    def __init__(self, names: list[str], details: list[str]):
        self.names = list(names)
        self.details = list(details)
        super().__init__("; ".join(f"{n}: {d}" for n, d in zip(names, details)))


def hl_maximal(f: SampledSignal) -> SampledSignal:
    """Uncentered maximal function over windows of dyadic length.

    ``Mf(x_i)`` is the largest average of ``|f|`` over windows of ``2**j``
    consecutive cells (any offset, inside the grid) that contain cell ``i``.
    It lies between half the full uncentered maximal function and that
    function itself.
    """
    a = np.abs(f.samples)
    n = a.size
    csum = np.concatenate(([0.0], np.cumsum(a)))
    out = np.zeros(n)
    w = 1
    while w <= n:
        # avg[s]: window of w cells starting at s; cell i sees starts i-w+1 .. i
        avg = np.full(n, -np.inf)
        avg[: n - w + 1] = (csum[w:] - csum[:-w]) / w
        out = np.maximum(
            out, maximum_filter1d(avg, size=w, origin=(w - 1) // 2, mode="constant", cval=-np.inf)
        )
        w <<= 1
    return f.with_samples(out)


@dataclass(frozen=True, eq=False)
class CellSet:
    """A union of grid cells ``[x0 + i*dx, x0 + (i+1)*dx)``."""

    mask: np.ndarray
    x0: float
    dx: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def measure(self) -> float:
        return self.count * self.dx

    def cell_interval(self, start: int, size: int) -> Interval:
        return Interval(self.x0 + start * self.dx, self.x0 + (start + size) * self.dx)


def level_set(Mf: SampledSignal, threshold: float) -> CellSet:
    """Cells where ``Mf`` exceeds ``threshold`` strictly."""
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    return CellSet(np.real(Mf.samples) > threshold, Mf.x0, Mf.dx)


def dyadic_cells(E: CellSet) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Maximal aligned dyadic cell blocks ``I`` with ``6I`` inside ``E``.

    Returns ``(blocks, covered)``: blocks as ``(start, size)`` in cell units
    (``size`` a power of two, ``start`` a multiple of it) in increasing
    order, and the mask of cells they cover.
    """
    mask = np.asarray(E.mask, dtype=bool)
    n = mask.size
    csum = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
    covered = np.zeros(n, dtype=bool)
    blocks: list[tuple[int, int]] = []
    top = 0
    while (1 << (top + 1)) <= n:
        top += 1
    for j in range(top, -1, -1):
        size = 1 << j
        starts = np.arange(0, n - size + 1, size)
        if starts.size == 0:
            continue
        # 6I covers [start - 2.5 size, start + 3.5 size); round outwards to cells
        lo = starts - (5 * size + 1) // 2
        hi = starts + (7 * size + 1) // 2
        inside = (lo >= 0) & (hi <= n)
        lo_c = np.clip(lo, 0, n)
        hi_c = np.clip(hi, 0, n)
        full = inside & (csum[hi_c] - csum[lo_c] == hi_c - lo_c)
        fresh = full & ~covered[starts]
        for s in starts[fresh]:
            blocks.append((int(s), size))
            covered[s : s + size] = True
    blocks.sort()
    return blocks, covered


def maximal_dyadic_intervals(E: CellSet) -> list[Interval]:
    """Maximal grid-aligned dyadic intervals ``I`` in ``E`` with ``6I`` in ``E``."""
    blocks, _ = dyadic_cells(E)
    return [E.cell_interval(s, size) for s, size in blocks]


@dataclass(frozen=True, eq=False)
class CzPiece:
    """One bad piece.  ``f_I``, ``g_I`` and ``b_I`` live on the sub-grid of ``3I``."""

    I: Interval
    start: int  # first cell of I in the padded grid
    size: int  # cells in I
    window: int  # first cell of 3I in the padded grid
    f_I: SampledSignal
    g_I: SampledSignal
    b_I: SampledSignal
    regularized: bool
    condition: float

    @property
    def support(self) -> Interval:
        return self.b_I.domain


@dataclass(frozen=True)
class CzDiagnostics:
    r_cover: float
    r_good: float
    r_fI: float
    r_proj: float
    r_proj_unscaled: float
    moment_residual_max: float
    overlap_max: int
    E_measure: float
    uncovered_measure: float
    regularized_count: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(eq=False)
class CzOutput:
    lam: float
    xi: FrequencySet
    f: SampledSignal  # zero-padded input
    pieces: list[CzPiece]
    g: SampledSignal
    E: CellSet
    covered: np.ndarray
    original: Interval
    diagnostics: CzDiagnostics | None = field(default=None)

    @property
    def N(self) -> int:
        return self.xi.N

    def bad(self) -> SampledSignal:
        """``b = sum_I b_I`` on the padded grid."""
        out = np.zeros(self.f.M, dtype=complex)
        for p in self.pieces:
            out[p.window : p.window + p.b_I.M] += p.b_I.samples
        return self.f.with_samples(out)

    def to_json(self) -> dict:
        d = self.diagnostics
        return {
            "lambda": self.lam,
            "N": self.N,
            "xi": [float(v) for v in self.xi.xi],
            "E_measure": self.E.measure,
            "intervals": [
                {"a": p.I.a, "b": p.I.b, "regularized": p.regularized} for p in self.pieces
            ],
            "diagnostics": None if d is None else d.as_dict(),
        }


def pad(f: SampledSignal, factor: int = PAD_FACTOR) -> SampledSignal:
    """Zero-pad by ``factor`` signal lengths on each side."""
    extra = factor * f.M
    samples = np.concatenate((np.zeros(extra, complex), f.samples, np.zeros(extra, complex)))
    return SampledSignal(samples, f.x0 - extra * f.dx, f.dx)


def cz_decompose(f: SampledSignal, xi, lam: float, *, verify: bool = True) -> CzOutput:
    """Decompose ``f = g + sum_I b_I`` at height ``lam`` for frequencies ``xi``.

    The returned signals live on the padded grid (8 signal lengths of zeros
    on each side).  With ``verify`` the exact invariants are checked and the
    diagnostics filled in (see :func:`verify_bounds`).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xi = as_frequency_set(xi)
    fp = pad(f)
    N = xi.N
    if not np.any(fp.samples):
        E = CellSet(np.zeros(fp.M, bool), fp.x0, fp.dx)
        out = CzOutput(lam, xi, fp, [], fp, E, np.zeros(fp.M, bool), f.domain)
    else:
        Mf = hl_maximal(fp)
        E = level_set(Mf, lam / math.sqrt(N))
        blocks, covered = dyadic_cells(E)
        pieces = []
        g = fp.samples.copy()
        for start, size in blocks:
            win = start - size
            I = E.cell_interval(start, size)
            J = E.cell_interval(win, 3 * size)
            loc = np.zeros(3 * size, complex)
            loc[size : 2 * size] = fp.samples[start : start + size]
            f_I = SampledSignal(loc, fp.x0 + win * fp.dx, fp.dx)
            proj = expspan.riesz_project(f_I, J, xi)
            g_I = proj.g
            b_I = f_I.with_samples(f_I.samples - g_I.samples)
            g[win : win + 3 * size] -= b_I.samples
            pieces.append(
                CzPiece(I, start, size, win, f_I, g_I, b_I, proj.regularized, proj.condition)
            )
        out = CzOutput(lam, xi, fp, pieces, fp.with_samples(g), E, covered, f.domain)
    if verify:
        out.diagnostics = verify_bounds(out, f)
    return out


def overlap_count(pieces: list[CzPiece], n: int) -> np.ndarray:
    """Number of dilates ``3I`` containing each padded cell."""
    diff = np.zeros(n + 1, dtype=np.int64)
    for p in pieces:
        diff[p.window] += 1
        diff[p.window + 3 * p.size] -= 1
    return np.cumsum(diff)[:n]


def diagnostics(out: CzOutput, f: SampledSignal) -> CzDiagnostics:
    """Scaling ratios of the decomposition with the universal constant divided out."""
    lam, N = out.lam, out.N
    f1 = norm(f, p=1)
    sqN = math.sqrt(N)
    total = sum(p.I.length for p in out.pieces)
    g2 = norm(out.g, p=2) ** 2
    r_fI = r_proj = r_proj_u = res = 0.0
    for p in out.pieces:
        fI1 = norm(p.f_I, p=1)
        gI2 = norm(p.g_I, p=2)
        r_fI = max(r_fI, fI1 / (p.I.length * lam))
        r_proj = max(r_proj, gI2 / (math.sqrt(p.I.length) * lam * sqN))
        r_proj_u = max(r_proj_u, gI2 / (math.sqrt(p.I.length) * lam))
        res = max(res, piece_moment_residual(p, out.xi))
    ov = overlap_count(out.pieces, out.f.M)
    uncovered = np.count_nonzero(out.E.mask & ~out.covered) * out.E.dx
    return CzDiagnostics(
        r_cover=total * lam / (sqN * f1) if f1 > 0 else 0.0,
        r_good=g2 / (f1 * sqN * lam) if f1 > 0 else 0.0,
        r_fI=r_fI,
        r_proj=r_proj,
        r_proj_unscaled=r_proj_u,
        moment_residual_max=res,
        overlap_max=int(ov.max()) if ov.size else 0,
        E_measure=out.E.measure,
        uncovered_measure=float(uncovered),
        regularized_count=sum(p.regularized for p in out.pieces),
    )


def piece_moment_residual(p: CzPiece, xi) -> float:
    """Largest moment of ``b_I`` relative to ``1 + ||f_I||_1``."""
    m = expspan.moments(p.b_I, p.b_I.domain, xi)
    return float(np.max(np.abs(m))) / (1.0 + norm(p.f_I, p=1))


def verify_bounds(out: CzOutput, f: SampledSignal) -> CzDiagnostics:
    """Check the exact invariants and return the diagnostic ratios.

    Raises :class:`InvariantViolation` naming every failed invariant:
    vanishing moments, b_I = f_I - g_I, support in 3I, f_I = f on I,
    disjointness, 6I inside E, and the reconstruction g + sum b_I = f.
    """
    names, details = [], []

    def fail(name, detail):
        names.append(name)
        details.append(detail)

    fp = out.f
    n = fp.M
    if not (fp.M == f.M + 2 * PAD_FACTOR * f.M and np.array_equal(
        fp.samples[PAD_FACTOR * f.M : PAD_FACTOR * f.M + f.M], f.samples
    )):
        fail("padding", "padded signal does not embed the input")
    worst = 0.0
    for p in out.pieces:
        worst = max(worst, piece_moment_residual(p, out.xi))
    if worst > MOMENT_TOL:
        fail("moment_residual", f"max relative moment of b_I is {worst:.3e} > {MOMENT_TOL:g}")
    for p in out.pieces:
        if not (p.b_I.M == 3 * p.size and p.window == p.start - p.size):
            fail("support_3I", f"b_I for {p.I} is not carried by 3I")
            break
        expect = np.zeros(3 * p.size, complex)
        expect[p.size : 2 * p.size] = fp.samples[p.start : p.start + p.size]
        if not np.array_equal(p.f_I.samples, expect):
            fail("f_I_restriction", f"f_I for {p.I} is not f restricted to I")
            break
    scale = 1.0 + float(np.max(np.abs(fp.samples)))
    for p in out.pieces:
        if np.max(np.abs(p.b_I.samples - (p.f_I.samples - p.g_I.samples))) > RECON_TOL * scale:
            fail("b_I_definition", f"b_I != f_I - g_I on {p.I}")
            break
    order = sorted(out.pieces, key=lambda p: p.start)
    for p, q in zip(order, order[1:]):
        if p.start + p.size > q.start:
            fail("disjoint", f"intervals {p.I} and {q.I} overlap")
            break
    mask = out.E.mask
    for p in out.pieces:
        lo = p.start - (5 * p.size + 1) // 2
        hi = p.start + (7 * p.size + 1) // 2
        if lo < 0 or hi > n or not mask[lo:hi].all():
            fail("six_I_in_E", f"6I is not contained in E for {p.I}")
            break
    recon = out.g.samples + out.bad().samples
    err = float(np.max(np.abs(recon - fp.samples))) if n else 0.0
    if err > RECON_TOL * scale:
        fail("reconstruction", f"max |g + sum b_I - f| = {err:.3e}")
    bad = out.bad().samples
    if np.any(bad[~mask] != 0):
        fail("b_in_E", "b has mass outside E")
    if names:
        raise InvariantViolation(names, details)
    return diagnostics(out, f)
