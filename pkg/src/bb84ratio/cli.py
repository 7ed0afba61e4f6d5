"""Command-line front end emitting figure-ready CSV/JSON datasets.

Subcommands: ``sweep`` (rate/argmax curves over an error-rate grid),
``optimize`` (one point), ``finite-n`` (exact bound sums), ``simulate``
(estimation-stage Monte Carlo), ``audit`` (closed-form vs inversion
discrepancies) and ``report`` (sweep CSV plus rendered figures).

Output is deterministic: identical configurations produce byte-identical
files. The environment variable ``BB84RATIO_OUTDIR`` supplies the directory
for relative output paths.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .errors import KeyRateError
from .exponents import ProtocolParams
from .finite_n import (
    CountLayout,
    b_bit_exact,
    b_phase_exact,
    simulate_estimation,
)
from .optimizer import OptimizationResult, SweepFailure, sweep as run_sweep
from .optimizer import optimize_asymmetric, optimize_symmetric
from .sacrifice import cross_check, s_by_inversion

__all__ = ["build_parser", "run", "main"]

OUTDIR_ENV = "BB84RATIO_OUTDIR"

SWEEP_COLUMNS = ["q", "mode", "p1_opt", "p2_opt", "S1", "S2", "R_raw", "R", "error"]

AUDIT_P1_GRID = (0.05, 0.1, 0.25, 0.4)
AUDIT_P2_GRID = (0.05, 0.15, 0.3, 0.45)
AUDIT_Q_GRID = (0.01, 0.05, 0.11)
AUDIT_C_GRID = (1e-5, 1e-4, 1e-3, 0.03, 0.3)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _render_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in columns])
    return buf.getvalue()


def _render(columns: list[str], rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        return _render_csv(columns, rows)
    ordered = [{col: row.get(col) for col in columns} for row in rows]
    return json.dumps(ordered, indent=2) + "\n"


def _write_output(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )
    parser.add_argument(
        "--output",
        default="-",
        help="output path ('-' for stdout; relative paths honor $BB84RATIO_OUTDIR)",
    )


def _check_rate_flag(parser, name: str, value: float) -> float:
    if not 0.0 < value < 0.5:
        parser.error(f"{name}={value} must lie strictly inside (0, 1/2)")
    return value


def _q_grid(parser, start: float, end: float, step: float) -> list[float]:
    if step <= 0.0:
        parser.error(f"--q-step={step} must be positive")
    if start > end:
        parser.error(f"--q-start={start} exceeds --q-end={end}")
    _check_rate_flag(parser, "--q-start", start)
    _check_rate_flag(parser, "--q-end", end)
    count = int((end - start) / step + 1e-9) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _sweep_row(result: OptimizationResult | SweepFailure) -> dict:
    if isinstance(result, SweepFailure):
        return {"q": result.q, "mode": result.mode, "error": result.error}
    best = result.best
    return {
        "q": result.q,
        "mode": result.mode,
        "p1_opt": result.argmax_p1,
        "p2_opt": result.argmax_p2,
        "S1": best.S1,
        "S2": best.S2,
        "R_raw": best.R_raw,
        "R": best.R,
        "error": None,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bb84ratio",
        description=(
            "Key-rate trade-off calculator for two-basis key distribution"
            " under exponential failure-decay constraints."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "sweep", help="optimize the key rate over an error-rate grid"
    )
    p.add_argument("--q-start", type=float, required=True)
    p.add_argument("--q-end", type=float, required=True)
    p.add_argument("--q-step", type=float, required=True)
    p.add_argument("--c", type=float, default=1e-4, help="exponent constraint")
    p.add_argument(
        "--mode",
        choices=("asymmetric", "symmetric", "both"),
        default="both",
    )
    p.add_argument(
        "--phase-model",
        choices=("bit-formula", "phase-formula"),
        default="bit-formula",
        help="sacrifice functional for the symmetric privacy term",
    )
    p.add_argument("--jobs", type=int, default=1, help="worker processes (0 = all)")
    _add_output_options(p)

    p = sub.add_parser("optimize", help="optimize the key rate at a single point")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--c", type=float, default=1e-4)
    p.add_argument("--mode", choices=("asymmetric", "symmetric"), default="asymmetric")
    p.add_argument(
        "--phase-model",
        choices=("bit-formula", "phase-formula"),
        default="bit-formula",
    )
    _add_output_options(p)

    p = sub.add_parser("finite-n", help="exact failure-bound sums at finite N")
    p.add_argument("--basis", choices=("bit", "phase"), default="phase")
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--c", type=float, default=1e-4)
    p.add_argument(
        "--n", type=int, nargs="+", required=True, help="block lengths to evaluate"
    )
    p.add_argument(
        "--range",
        choices=("types", "population"),
        default="types",
        dest="range_mode",
        help="rate grid of the sum: k/N for k=0..N, or over the population",
    )
    p.add_argument(
        "--poly-factor",
        choices=("none", "bound", "paper"),
        default="none",
        help="polynomial prefactor placement in the summands",
    )
    _add_output_options(p)

    p = sub.add_parser("simulate", help="Monte Carlo of the estimation error split")
    p.add_argument("--n-sample", type=int, required=True)
    p.add_argument("--n-pop", type=int, required=True)
    p.add_argument("--errors", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_output_options(p)

    p = sub.add_parser(
        "audit", help="closed-form vs inversion sacrifice discrepancies"
    )
    p.add_argument(
        "--c",
        type=float,
        nargs="+",
        default=list(AUDIT_C_GRID),
        help="constraint values of the audit grid",
    )
    _add_output_options(p)

    p = sub.add_parser(
        "report", help="sweep CSV plus rendered figures in one directory"
    )
    p.add_argument("--q-start", type=float, default=0.005)
    p.add_argument("--q-end", type=float, default=0.11)
    p.add_argument("--q-step", type=float, default=0.005)
    p.add_argument("--c", type=float, default=1e-4)
    p.add_argument(
        "--phase-model",
        choices=("bit-formula", "phase-formula"),
        default="bit-formula",
    )
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all)")
    p.add_argument(
        "--out-dir",
        default=None,
        help="output directory (default: $BB84RATIO_OUTDIR or '.')",
    )
    return parser


def _cmd_sweep(parser, args) -> int:
    grid = _q_grid(parser, args.q_start, args.q_end, args.q_step)
    if args.c < 0.0:
        parser.error(f"--c={args.c} must be nonnegative")
    modes = ("asymmetric", "symmetric") if args.mode == "both" else (args.mode,)
    results = run_sweep(
        grid, args.c, modes=modes, phase_model=args.phase_model, jobs=args.jobs
    )
    rows = [_sweep_row(r) for r in results]
    _write_output(_render(SWEEP_COLUMNS, rows, args.format), args.output)
    return 1 if any(isinstance(r, SweepFailure) for r in results) else 0


def _cmd_optimize(parser, args) -> int:
    _check_rate_flag(parser, "--q", args.q)
    if args.c < 0.0:
        parser.error(f"--c={args.c} must be nonnegative")
    if args.mode == "asymmetric":
        result = optimize_asymmetric(args.q, args.c)
    else:
        result = optimize_symmetric(args.q, args.c, args.phase_model)
    _write_output(
        _render(SWEEP_COLUMNS, [_sweep_row(result)], args.format), args.output
    )
    return 0


def _cmd_finite_n(parser, args) -> int:
    _check_rate_flag(parser, "--q", args.q)
    if args.c < 0.0:
        parser.error(f"--c={args.c} must be nonnegative")
    try:
        params = ProtocolParams(p1=args.p1, p2=args.p2)
        sacrifice = s_by_inversion(args.basis, params, args.q, args.c)
        rows = []
        for n in args.n:
            if args.basis == "phase":
                res = b_phase_exact(
                    n,
                    params,
                    args.q,
                    sacrifice.S,
                    range_mode=args.range_mode,
                    poly_factor=args.poly_factor,
                )
            else:
                res = b_bit_exact(
                    n,
                    params,
                    args.q,
                    sacrifice.S,
                    range_mode=args.range_mode,
                    poly_factor=args.poly_factor,
                )
            rows.append(
                {
                    "N": res.N,
                    "basis": args.basis,
                    "S": sacrifice.S,
                    "log2_B": res.log2_B,
                    "empirical_exponent": res.empirical_exponent,
                    "asymptotic_exponent": res.asymptotic_exponent,
                }
            )
    except KeyRateError as exc:
        parser.error(str(exc))
    columns = ["N", "basis", "S", "log2_B", "empirical_exponent", "asymptotic_exponent"]
    _write_output(_render(columns, rows, args.format), args.output)
    return 0


def _cmd_simulate(parser, args) -> int:
    try:
        layout = CountLayout(
            N=args.n_sample + args.n_pop,
            n_sample=args.n_sample,
            n_pop=args.n_pop,
        )
        table = simulate_estimation(layout, args.errors, args.trials, args.seed)
    except KeyRateError as exc:
        parser.error(str(exc))
    columns = ["k_sample", "k_pop", "count", "frequency", "exact_prob", "z_score"]
    _write_output(_render(columns, table.rows(), args.format), args.output)
    return 0


def _cmd_audit(parser, args) -> int:
    for c in args.c:
        if c < 0.0:
            parser.error(f"--c={c} must be nonnegative")
    rows = []
    failed = False
    for basis in ("bit", "phase"):
        for p1 in AUDIT_P1_GRID:
            for p2 in AUDIT_P2_GRID:
                for q in AUDIT_Q_GRID:
                    for c in args.c:
                        report = cross_check(basis, ProtocolParams(p1, p2), q, c)
                        failed = failed or report.error is not None
                        rows.append(
                            {
                                "basis": report.basis,
                                "p1": report.p1,
                                "p2": report.p2,
                                "q": report.q,
                                "C": report.C,
                                "branch_closed": report.branch_closed,
                                "branch_inversion": report.branch_inversion,
                                "s_closed": report.s_closed,
                                "s_inversion": report.s_inversion,
                                "discrepancy": report.discrepancy,
                                "residual_closed": report.residual_closed,
                                "residual_inversion": report.residual_inversion,
                                "error": report.error,
                            }
                        )
    columns = [
        "basis",
        "p1",
        "p2",
        "q",
        "C",
        "branch_closed",
        "branch_inversion",
        "s_closed",
        "s_inversion",
        "discrepancy",
        "residual_closed",
        "residual_inversion",
        "error",
    ]
    _write_output(_render(columns, rows, args.format), args.output)
    return 1 if failed else 0


def _cmd_report(parser, args) -> int:
    from .report import write_report

    grid = _q_grid(parser, args.q_start, args.q_end, args.q_step)
    if args.c < 0.0:
        parser.error(f"--c={args.c} must be nonnegative")
    out_dir = args.out_dir or os.environ.get(OUTDIR_ENV) or "."
    results = run_sweep(
        grid,
        args.c,
        modes=("asymmetric", "symmetric"),
        phase_model=args.phase_model,
        jobs=args.jobs,
    )
    rows = [_sweep_row(r) for r in results]
    csv_text = _render_csv(SWEEP_COLUMNS, rows)
    written = write_report(results, Path(out_dir), csv_text)
    for path in written:
        sys.stdout.write(f"{path}\n")
    return 1 if any(isinstance(r, SweepFailure) for r in results) else 0


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "optimize": _cmd_optimize,
        "finite-n": _cmd_finite_n,
        "simulate": _cmd_simulate,
        "audit": _cmd_audit,
        "report": _cmd_report,
    }
    return handlers[args.command](parser, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
