"""Command-line front end.

Exit codes: 0 success, 1 domain failure (singular system, failed
replication), 2 usage, I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import bouvard
from .errors import FormatError, LaplaceError, UnknownDatasetError
from .fileformats import fmt, read_system, write_system
from .inference import ConfidenceQuery, odds_against, prob_outside, prob_within, variance_for_variable
from .matrix_core import NormalSystem
from .precision import DEFAULT_DIGITS, replay_factor
from .reverse_cholesky import ReverseCholesky, Snapshot, build, extract_L, factor, solve

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def step_name(n: int, size: int) -> str:
    idx = n - size
    return f"STEP {chr(ord('A') + idx)}" if idx < 26 else f"STEP size {size}"


def _load(source: str) -> tuple[NormalSystem, bouvard.HistoricalDataset | None]:
    if source in bouvard.DATASETS:
        d = bouvard.load_dataset(source)
        return d.system, d
    return read_system(source), None


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, ensure_ascii=False))


def _upper_block(matrix: np.ndarray, rhs: np.ndarray) -> list[str]:
    k = len(rhs)
    lines = []
    for i in range(k):
        cells = [" " * 14] * i + [f"{matrix[i, j]:>14.8g}" for j in range(i, k)]
        lines.append(" ".join(cells) + f" | {rhs[i]:>14.8g}")
    return lines


def factorization_to_json(f: ReverseCholesky, snapshots: bool) -> dict:
    doc = {
        "command": "factor",
        "n": f.n,
        "labels": list(f.labels),
        "M": [[float(f.M[i, j]) for j in range(i + 1)] for i in range(f.n)],
        "diagonal": [float(v) for v in f.diagonal],
        "L": [[float(v) for v in row[: i + 1]] for i, row in enumerate(extract_L(f))],
        "reduced_rhs": [float(v) for v in f.reduced_rhs],
    }
    if snapshots:
        doc["snapshots"] = [
            {
                "step": step_name(f.n, s.size),
                "size": s.size,
                "matrix": [[float(v) for v in row[: i + 1]] for i, row in enumerate(s.matrix)],
                "rhs": [float(v) for v in s.rhs],
            }
            for s in f.snapshots
        ]
    return doc


def factorization_from_json(doc: dict) -> ReverseCholesky:
    """Rebuild a :class:`ReverseCholesky` from :func:`factorization_to_json` output."""
    states = [(s["size"], s["matrix"], s["rhs"]) for s in doc.get("snapshots", [])]
    return build(doc["M"], doc["reduced_rhs"], states, doc["labels"])


def cmd_factor(args) -> int:
    S, _ = _load(args.input)
    f = factor(S, snapshots=True if args.snapshots else None)
    if args.json:
        _emit(factorization_to_json(f, args.snapshots))
        return EXIT_OK
    print("M diagonal (reduced squared norms):")
    for label, v in zip(f.labels, f.diagonal):
        print(f"  {label:>6}  {fmt(v)}")
    print("L = D^(-1/2) M:")
    L = extract_L(f)
    for i in range(f.n):
        print("  " + " ".join(f"{L[i, j]:>14.8g}" for j in range(i + 1)))
    if args.snapshots:
        for snap in f.snapshots:
            print(f"{step_name(f.n, snap.size)} ({snap.size} variable{'s' if snap.size > 1 else ''}):")
            for line in _upper_block(snap.matrix, snap.rhs):
                print("  " + line)
    return EXIT_OK


def cmd_solve(args) -> int:
    S, _ = _load(args.input)
    if not 1 <= args.vars <= S.n:
        raise UsageError(f"--vars must be in 1..{S.n}, got {args.vars}")
    sol = solve(factor(S), args.vars)
    if args.json:
        _emit({
            "command": "solve",
            "solved": sol.solved_prefix,
            "variables": [{"index": j + 1, "label": S.labels[j], "value": sol[j]} for j in range(sol.solved_prefix)],
        })
        return EXIT_OK
    for j in range(sol.solved_prefix):
        print(f"{S.labels[j]:>6} = {sol[j]:.10g}")
    return EXIT_OK


def cmd_variance(args) -> int:
    S, _ = _load(args.input)
    if S.s is None or S.rss is None:
        raise UsageError("input needs 's' and 'rss' for variance computations")
    if args.all:
        indices = list(range(S.n))
    else:
        if not 1 <= args.var <= S.n:
            raise UsageError(f"--var must be in 1..{S.n}, got {args.var}")
        indices = [args.var - 1]
    reports = [variance_for_variable(S, j, unbiased=args.unbiased) for j in indices]
    if args.json:
        _emit({
            "command": "variance",
            "unbiased": args.unbiased,
            "variables": [
                {
                    "index": r.variable + 1,
                    "label": r.label,
                    "poids": r.poids,
                    "log10_poids": r.log10_poids,
                    "sigma": r.sigma,
                    "sigma_b2_estimate": r.sigma_b2_estimate,
                }
                for r in reports
            ],
        })
        return EXIT_OK
    print(f"{'var':>6} {'P':>16} {'log10 P':>12} {'sigma':>14}")
    for r in reports:
        print(f"{r.label:>6} {r.poids:>16.8g} {r.log10_poids:>12.7f} {r.sigma:>14.8g}")
    return EXIT_OK


def _one_in(d: float) -> str:
    if d == float("inf"):
        return "1 in infinity"
    return f"1 in ~{d:,.0f}" if d >= 100 else f"1 in ~{d:.1f}"


def cmd_confidence(args) -> int:
    q = ConfidenceQuery.from_log10(args.log10_poids, args.half_width) if args.poids is None \
        else ConfidenceQuery(args.poids, args.half_width)
    p, tail, d = prob_within(q), prob_outside(q), odds_against(q)
    if args.json:
        _emit({
            "command": "confidence",
            "poids": q.poids,
            "half_width": q.half_width,
            "probability": p,
            "complement": tail,
            "one_in": None if d == float("inf") else d,
        })
        return EXIT_OK
    print(f"probability  {p:.12g}")
    print(f"complement   {tail:.6g} ({_one_in(d)})")
    return EXIT_OK


def cmd_replicate(args) -> int:
    d = bouvard.load_dataset(args.dataset)
    if args.export:
        write_system(d.system, args.export)
    report = bouvard.replicate(d)
    if args.json:
        _emit(report.to_dict())
    else:
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            kind = "gate" if c.gating else "info"
            unit = " rel" if c.relative else ""
            note = f"  [{c.note}]" if c.note else ""
            print(f"{status} {kind} {c.group:<13} {c.name:<40} computed={c.computed:.10g} "
                  f"expected={c.expected:.10g} tol={c.tolerance:g}{unit} ({c.provenance}){note}")
        gating = [c for c in report.checks if c.gating]
        print(f"{sum(c.passed for c in gating)}/{len(gating)} gating checks passed; "
              f"{len(report.failures(gating_only=False))} informational deviations")
    return EXIT_OK if report.passed else EXIT_DOMAIN


def cmd_precision_replay(args) -> int:
    S, dataset = _load(args.input)
    historical = dataset.printed_snapshots if dataset is not None else None
    result = replay_factor(S, args.digits, historical)
    rep = result.report
    if args.json:
        doc = rep.to_dict()
        doc["command"] = "precision-replay"
        _emit(doc)
        return EXIT_OK
    print(f"replay at {rep.digits} significant digits; total digits lost vs double precision: "
          f"{rep.total_disagreement()}")
    for size in range(S.n, 0, -1):
        print(f"{step_name(S.n, size)}:")
        for e in rep.for_size(size):
            where = f"rhs({e.row + 1})" if e.col is None else f"({e.row + 1},{e.col + 1})"
            hist = ""
            if e.historical is not None:
                hist = f"  printed {e.historical:>12} vs {e.historical_reference:.10g} {'ok' if e.historical_ok else 'DIFF'}"
            flag = "*" if e.flagged else " "
            print(f" {flag} {where:<8} replay {e.replayed:>16.10g}  double {e.reference:>18.12g}  "
                  f"agree {e.agreement:>2}{hist}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laplace-ls",
        description="Laplace's reverse elimination for least squares: factor, solve, poids and replication.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    src_help = "normal-system or regression file, or the name of a built-in dataset (saturn-motion)"

    p = sub.add_parser("factor", help="reverse square-root-free Cholesky factorization")
    p.add_argument("input", help=src_help)
    p.add_argument("--snapshots", action="store_true", help="print every intermediate system")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("solve", help="forward-solve the leading variables")
    p.add_argument("input", help=src_help)
    p.add_argument("--vars", type=int, required=True, help="number of leading variables to solve")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("variance", help="poids and standard deviation per variable")
    p.add_argument("input", help=src_help)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--var", type=int, help="1-based variable index")
    g.add_argument("--all", action="store_true")
    p.add_argument("--unbiased", action="store_true", help="estimate noise variance with rss/(s-n)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("confidence", help="probability that the error lies within +/- U")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--log10-poids", type=float)
    g.add_argument("--poids", type=float)
    p.add_argument("--half-width", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_confidence)

    p = sub.add_parser("replicate", help="replicate the published Bouvard computation")
    p.add_argument("--dataset", default="saturn-motion")
    p.add_argument("--export", metavar="PATH", help="also write the dataset as a normal-system file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("precision-replay", help="replay in fixed significant-digit arithmetic")
    p.add_argument("input", help=src_help)
    p.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_precision_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "digits", None) is not None and not 2 <= args.digits <= 15:
        print("error: --digits must be in 2..15", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, FormatError, UnknownDatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LaplaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
