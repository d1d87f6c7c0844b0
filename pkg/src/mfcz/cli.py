"""Command line front end.

Exit codes: 0 success, 1 usage or input error, 2 invariant violation or a
scan outside its exponent budget.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import calibration, checks, czdecomp, fileio, multifreq
from .grid import FrequencySet

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
SCAN_COLUMNS = ["N", "trial", "seed", "S", "A", "D0", "D1", "sup_symbol_variation"]


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _grid(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be an integer, got {text!r}") from None
    if v < 16 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"grid must be a power of two >= 16, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfcz", description="Multi-frequency CZ decomposition and variational operator experiments")
    sub = p.add_subparsers(dest="command", required=True)

    cz = sub.add_parser("cz", help="decompose a sampled signal and verify the exact invariants")
    cz.add_argument("--signal", required=True, help="CSV with columns x,re[,im] on a uniform grid")
    cz.add_argument("--xi", required=True, help="comma separated frequencies")
    cz.add_argument("--lambda", dest="lam", required=True, type=float)
    cz.add_argument("--out", help="output path (default: stdout)")
    cz.add_argument("--format", choices=["json"], default="json")

    scan = sub.add_parser("scan", help="operator scaling or weak-type scan")
    scan.add_argument("--mode", choices=["vmt", "weak"], default="vmt")
    scan.add_argument("--N", default="2,4,8,16,32", help="comma separated list of N")
    scan.add_argument("--trials", type=int, default=20)
    scan.add_argument("--q", type=float, default=4.0)
    scan.add_argument("--r", type=float, default=2.5)
    scan.add_argument("--seed", type=_seed, default=0)
    scan.add_argument("--grid", type=_grid, default=1 << 14)
    scan.add_argument("--krange", help="scales lo:hi (default: widest valid range)")
    scan.add_argument("--out", help="CSV path; the fit goes next to it as .fit.json (default: stdout)")
    scan.add_argument("--format", choices=["csv", "json"], default="csv")

    chk = sub.add_parser("check", help="run the invariant suite")
    chk.add_argument("--seed", type=_seed, default=0)
    chk.add_argument("--inject-fault", choices=list(checks.FAULTS))

    cal = sub.add_parser("calibrate", help="measure and freeze harness constants")
    cal.add_argument("--seed", type=_seed, default=calibration.CAL_SEED)
    cal.add_argument("--out", help="output path (default: stdout)")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_cz(args) -> int:
    if not (math.isfinite(args.lam) and args.lam > 0):
        raise UsageError(f"lambda must be positive and finite, got {args.lam}")
    try:
        xi = FrequencySet(fileio.parse_float_list(args.xi))
    except ValueError as exc:
        raise UsageError(f"--xi: {exc}") from None
    try:
        f = fileio.read_signal(args.signal)
    except OSError as exc:
        raise UsageError(f"cannot read {args.signal}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"{args.signal}: {exc}") from None
    out = czdecomp.cz_decompose(f, xi, args.lam, verify=False)
    try:
        out.diagnostics = czdecomp.verify_bounds(out, f)
        violations = []
    except czdecomp.InvariantViolation as exc:
        violations = exc.names
        for name, detail in zip(exc.names, exc.details):
            print(f"invariant violated: {name}: {detail}", file=sys.stderr)
    doc = out.to_json()
    doc["violations"] = violations
    _emit(fileio.dumps_json(doc), args.out)
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_scan(args) -> int:
    try:
        Ns = fileio.parse_int_list(args.N)
    except ValueError as exc:
        raise UsageError(f"--N: {exc}") from None
    if not Ns:
        raise UsageError("--N needs at least one value")
    if not 2 < args.r < args.q:
        raise UsageError(f"need 2 < r < q, got r={args.r}, q={args.q}")
    try:
        ks = multifreq.KRange.parse(args.krange) if args.krange else None
        run = multifreq.scaling_scan if args.mode == "vmt" else multifreq.weak_scan
        res = run(Ns, args.trials, args.q, args.r, args.seed, grid=args.grid, ks=ks)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fit = res.fit_json()
    fit["mode"] = args.mode
    table = fileio.table_csv(res.rows, SCAN_COLUMNS)
    if args.format == "json":
        rows = [{c: getattr(r, c) for c in SCAN_COLUMNS} for r in res.rows]
        _emit(fileio.dumps_json({"fit": fit, "rows": rows}), args.out)
    elif args.out:
        Path(args.out).write_text(table)
        fileio.write_json(Path(args.out).with_suffix(".fit.json"), fit)
    else:
        sys.stdout.write(table)
        sys.stdout.write(fileio.dumps_json(fit))
    slope = "null" if res.slope is None else f"{res.slope:.4f}"
    print(f"slope={slope} budget={res.budget:.4f} pass={res.passed}", file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_VIOLATION


def cmd_check(args) -> int:
    results = checks.run_checks(args.seed, args.inject_fault)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def cmd_calibrate(args) -> int:
    _emit(fileio.dumps_json(calibration.calibrate(args.seed)), args.out)
    return EXIT_OK


COMMANDS = {"cz": cmd_cz, "scan": cmd_scan, "check": cmd_check, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mfcz {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
