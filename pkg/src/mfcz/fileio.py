"""CSV and JSON readers/writers for signals, sequences and scan tables."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .grid import SampledSignal
from .variation import VectorSequence

# relative tolerance on the spacing of signal x values
SPACING_TOL = 1e-9


class FormatError(ValueError):
    """Malformed input file; the message names the offending row."""


def _float(text: str, row: int, col: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise FormatError(f"row {row}: column {col!r} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"row {row}: column {col!r} is not finite")
    return v


def _rows(text: str, required: list[str]):
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("row 1: empty file") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise FormatError(f"row 1: header lacks column(s) {', '.join(missing)}")
    rows = []
    # row numbers count the header as row 1
    for i, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise FormatError(f"row {i}: expected {len(header)} fields, got {len(row)}")
        rows.append((i, dict(zip(header, (c.strip() for c in row)))))
    return header, rows


def read_signal(path) -> SampledSignal:
    """Read ``x,re[,im]`` rows on a uniform grid."""
    _, rows = _rows(Path(path).read_text(), ["x", "re"])
    if not rows:
        raise FormatError("row 2: no samples")
    x = np.array([_float(r["x"], i, "x") for i, r in rows])
    re = np.array([_float(r["re"], i, "re") for i, r in rows])
    im = np.array([_float(r["im"], i, "im") if "im" in r else 0.0 for i, r in rows])
    if x.size == 1:
        return SampledSignal(re + 1j * im, x[0], 1.0)
    dx = (x[-1] - x[0]) / (x.size - 1)
    if not dx > 0:
        raise FormatError(f"row {rows[1][0]}: x values must increase")
    dev = np.abs(x - (x[0] + dx * np.arange(x.size)))
    bad = np.nonzero(dev > SPACING_TOL * max(abs(dx), abs(x[0]), abs(x[-1])))[0]
    if bad.size:
        # blame the first step that disagrees with the opening step
        steps = np.diff(x)
        off = np.nonzero(np.abs(steps - steps[0]) > SPACING_TOL * max(abs(dx), abs(x[0]), abs(x[-1])))[0]
        i = off[0] + 1 if off.size else bad[0]
        raise FormatError(f"row {rows[i][0]}: x values are not uniformly spaced")
    return SampledSignal(re + 1j * im, x[0], dx)


def write_signal(path, f: SampledSignal) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for x, v in zip(f.x, f.samples):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def read_sequence(path) -> VectorSequence:
    """Read ``k,v1,...`` rows; complex components use ``vJ_re``/``vJ_im`` column pairs."""
    header, rows = _rows(Path(path).read_text(), ["k"])
    cols = [h for h in header if h != "k"]
    if not cols:
        raise FormatError("row 1: no value columns")
    complex_mode = any(c.endswith("_re") or c.endswith("_im") for c in cols)
    if complex_mode:
        names = sorted({c.rsplit("_", 1)[0] for c in cols}, key=_col_order(cols))
    else:
        names = cols
    keys, vals = [], []
    for i, r in rows:
        k = _float(r["k"], i, "k")
        if k != int(k):
            raise FormatError(f"row {i}: key {r['k']!r} is not an integer")
        keys.append(int(k))
        if complex_mode:
            vals.append([_float(r[f"{n}_re"], i, f"{n}_re") + 1j * _float(r[f"{n}_im"], i, f"{n}_im") for n in names])
        else:
            vals.append([_float(r[n], i, n) for n in names])
    if not keys:
        raise FormatError("row 2: no values")
    if any(b <= a for a, b in zip(keys, keys[1:])):
        bad = next(j for j in range(1, len(keys)) if keys[j] <= keys[j - 1])
        raise FormatError(f"row {rows[bad][0]}: keys must be strictly increasing")
    return VectorSequence(np.array(keys), np.array(vals))


def _col_order(cols):
    def key(name):
        if name + "_re" not in cols or name + "_im" not in cols:
            raise FormatError(f"row 1: column {name!r} needs both _re and _im parts")
        return cols.index(name + "_re")

    return key


def write_sequence(path, s: VectorSequence) -> None:
    cplx = np.iscomplexobj(s.values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        names = [f"v{j + 1}" for j in range(s.d)]
        w.writerow(["k"] + ([f"{n}_{p}" for n in names for p in ("re", "im")] if cplx else names))
        for k, row in zip(s.keys, s.values):
            if cplx:
                cells = [repr(float(part)) for v in row for part in (v.real, v.imag)]
            else:
                cells = [repr(float(v)) for v in row]
            w.writerow([int(k)] + cells)


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"not a comma separated list of numbers: {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"not a comma separated list of integers: {text!r}") from None


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, non-finite floats as strings."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))


def table_csv(rows: list, columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(getattr(r, c) if not isinstance(r, dict) else r[c]) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
