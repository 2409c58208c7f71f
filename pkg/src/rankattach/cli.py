"""``rankattach`` command line: generate, theory, analyze, verify, sweep.

Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.
Every CSV starts with one ``#`` comment line echoing the schema version and
all parameters; JSON files embed the same information as fields. Output
goes to ``--output`` or, failing that, ``$RANKATTACH_OUTPUT_DIR`` (default
the current directory).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io as rio
from . import theory, verification
from ._validation import check_alpha
from .generator import ProcessParams, generate, run_ensemble
from .ranking import KINDS, SchemeSpec
from .stats import (
    InsufficientDataError,
    compare_report,
    default_fit_window,
    degree_histogram,
    fit_exponent_hill,
    fit_exponent_ls,
)
from .weights import build_weight_table

SCHEMA_VERSION = 1
OUTPUT_ENV = "RANKATTACH_OUTPUT_DIR"
SWEEP_ALPHAS = (0.3, 0.5, 0.7, 0.9)
SWEEP_SCHEMES = ("age", "inverse-age", "label", "random:1", "random:2", "random:0.5", "degree")

log = logging.getLogger("rankattach")


class UsageError(ValueError):
    pass


# argument types --------------------------------------------------------


def count_arg(text: str) -> int:
    """Positive integer; accepts ``1e6`` style input."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def int_list_arg(text: str) -> list[int]:
    return [count_arg(p) for p in text.split(",") if p.strip()]


def float_list_arg(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def scheme_arg(text: str) -> SchemeSpec:
    try:
        return SchemeSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def pin_arg(text: str) -> tuple[int, float]:
    v, sep, x = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected VERTEX=VALUE, got {text!r}")
    return count_arg(v), float(x)


# output helpers ----------------------------------------------------------


def output_dir(args) -> Path:
    return Path(args.output or os.environ.get(OUTPUT_ENV) or ".")


def header_line(command: str, fields: dict) -> str:
    parts = [f"{k}={_fmt(v)}" for k, v in fields.items()]
    return f"# rankattach {command} schema={SCHEMA_VERSION} " + " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v) if v else "-"
    if isinstance(v, dict):
        return ",".join(f"{k}:{_fmt(x)}" for k, x in v.items()) if v else "-"
    return str(v)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def csv_text(header: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def emit(text: str, target: str | None) -> None:
    if target in (None, "-"):
        sys.stdout.write(text)
    else:
        write_text(Path(target), text)


# generate ----------------------------------------------------------------


def _params_from_args(args) -> ProcessParams:
    return ProcessParams(
        n=args.n,
        d=args.d,
        alpha=args.alpha,
        scheme=args.scheme,
        seed=args.seed,
        track=tuple(args.track),
        snapshot_times=tuple(args.snapshot_times),
        keep_edges=args.keep_edges,
        checkpoint_ratio=args.checkpoint_ratio,
        pinned=dict(args.pin),
    )


def fitted_exponent(hist, d) -> float | None:
    try:
        return fit_exponent_ls(hist, *default_fit_window(hist, d)).exponent
    except InsufficientDataError:
        return None


def _tail_formula(scheme: SchemeSpec):
    if scheme.kind == "age" or (scheme.kind == "random" and scheme.s > 1):
        return theory.tail_age
    if scheme.kind == "label" or (scheme.kind == "random" and scheme.s == 1):
        return theory.tail_label
    return None


def summary_dict(result, hist) -> dict:
    p = result.params
    return {
        "schema": SCHEMA_VERSION,
        "params": p.to_dict(),
        "seed": p.seed,
        "sum_degrees": int(result.degrees.sum()),
        "max_degree": hist.max_degree,
        "fitted_exponent": fitted_exponent(hist, p.d),
    }


def write_result(result, out: Path, fmt: str, run: int, theory_tail: bool) -> list[Path]:
    p = result.params
    echo = dict(p.to_dict(), run=run)
    hist = degree_histogram(result)
    written = []
    if fmt in ("csv", "all"):
        formula = _tail_formula(p.scheme) if theory_tail else None
        columns = ["k", "count", "tail_count"] + (["theory_tail"] if formula else [])
        rows = []
        for k in range(hist.max_degree + 1):
            count = hist.counts.get(k, 0)
            if count == 0:
                continue
            row = [k, count, int(hist.tail[k])]
            if formula:
                row.append(float(formula(k, p.n, p.d, p.alpha)) if k > 0 else None)
            rows.append(row)
        written.append(write_text(out / "degrees.csv", csv_text(header_line("generate", echo), columns, rows)))
        for v, traj in sorted(result.trajectories.items()):
            text = csv_text(header_line("generate", dict(echo, vertex=v)), ["t", "rank", "degree"], traj.tolist())
            written.append(write_text(out / f"trajectory_{v}.csv", text))
        for t, counts in result.snapshots:
            rows = [[k, c] for k, c in sorted(counts.items())]
            text = csv_text(header_line("generate", dict(echo, t=t)), ["k", "count"], rows)
            written.append(write_text(out / f"snapshot_{t}.csv", text))
    if fmt in ("json", "all"):
        written.append(write_text(out / "result.json", rio.dumps(result)))
    if fmt in ("npz", "all"):
        out.mkdir(parents=True, exist_ok=True)
        written.append(rio.save_npz(result, out / "result.npz"))
    written.append(write_text(out / "summary.json", json_text(summary_dict(result, hist))))
    return written


def cmd_generate(args) -> int:
    params = _params_from_args(args)
    out = output_dir(args)
    results = run_ensemble(params, args.runs, workers=args.workers)
    for k, result in enumerate(results):
        target = out if args.runs == 1 else out / f"run_{k}"
        for path in write_result(result, target, args.format, k, args.theory_tail):
            log.info("wrote %s", path)
    return 0


# theory ------------------------------------------------------------------


def cmd_theory(args) -> int:
    echo = {"alpha": args.alpha}
    if args.ck:
        table = theory.solve_Ck(args.alpha, args.kmax)
        rows = [[k, float(table.C[k])] for k in range(table.k_max + 1)]
        emit(csv_text(header_line("theory", dict(echo, table="ck", kmax=args.kmax)), ["k", "C_k"], rows), args.output)
    elif args.fractions:
        table = theory.solve_Ck(args.alpha, args.kmax)
        asym = theory.degree_fraction_asymptotic(args.alpha, np.arange(1, args.kmax + 1))
        rows = [[k, float(table.c[k]), float(asym[k - 1])] for k in range(1, args.kmax + 1)]
        head = header_line("theory", dict(echo, table="fractions", kmax=args.kmax))
        emit(csv_text(head, ["k", "c_k", "asymptotic"], rows), args.output)
    elif args.ode:
        xs = sorted(args.x)
        z = theory.integrate_degree_ode(args.alpha, args.kmax, xs=xs)
        rows = [[x, k + 1, float(z[j, k])] for j, x in enumerate(xs) for k in range(args.kmax)]
        head = header_line("theory", dict(echo, table="ode", kmax=args.kmax, x=xs))
        emit(csv_text(head, ["x", "k", "z_k"], rows), args.output)
    elif args.tail:
        f = {"age": theory.tail_age, "label": theory.tail_label, "random-high": theory.tail_age}[args.tail]
        ks = range(args.kmin, args.kmax + 1)
        rows = [[k, float(f(k, args.n, args.d, args.alpha))] for k in ks]
        head = header_line("theory", dict(echo, table=f"tail-{args.tail}", n=args.n, d=args.d, kmin=args.kmin, kmax=args.kmax))
        emit(csv_text(head, ["k", "tail_count"], rows), args.output)
    elif args.expected:
        rows, columns = _expected_rows(args)
        head = header_line("theory", dict(echo, table=f"expected-{args.expected}", n=args.n, d=args.d, i=args.i))
        emit(csv_text(head, columns, rows), args.output)
    else:
        raise UsageError("choose one of --ck, --fractions, --ode, --tail, --expected")
    return 0


def _expected_rows(args):
    n, d, alpha = args.n, args.d, args.alpha
    ivals = args.i or [1, 10, 100, 1000]
    if any(i > n for i in ivals):
        raise UsageError(f"vertex indices must not exceed n={n}")
    table = build_weight_table(alpha, n)
    if args.expected == "age":
        rows = [[i, theory.expected_degree_age(i, n, d, alpha), theory.exact_expected_degree(table, "age", i, n, d)] for i in ivals]
        return rows, ["i", "expected_degree", "exact"]
    rows = []
    for i in ivals:
        lo, hi = theory.expected_degree_inverse_age_bounds(i, n, d, alpha)
        rows.append([i, lo, hi, theory.exact_expected_degree(table, "inverse-age", i, n, d)])
    return rows, ["i", "lower", "upper", "exact"]


# analyze -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    try:
        result = rio.load_result(args.input)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read result file {args.input}: {exc}") from None
    p = result.params
    hist = degree_histogram(result)
    window = (args.kmin, args.kmax) if args.kmin and args.kmax else default_fit_window(hist, p.d)
    fit = fit_exponent_ls(hist, *window)
    report = {
        "schema": SCHEMA_VERSION,
        "params": p.to_dict(),
        "n": hist.n,
        "sum_degrees": hist.total_degree(),
        "max_degree": hist.max_degree,
        "fit_window": list(window),
        "ls_exponent": fit.exponent,
        "ls_r_squared": fit.r_squared,
        "alpha_from_ls": 1.0 / fit.exponent,
    }
    try:
        report["hill_exponent"] = fit_exponent_hill(result.degrees, args.hill_threshold)
    except InsufficientDataError as exc:
        report["hill_exponent"] = None
        report["hill_note"] = str(exc)
    if _tail_formula(p.scheme):
        ks = range(window[0], window[1] + 1)
        preds = theory.tail_predictions(p.scheme, ks, p.n, p.d, p.alpha)
        emp = {("tail_count", k): hist.tail_at(k) for k in ks}
        cmp = compare_report(emp, preds, args.tolerance, fitted_exponent=fit.exponent, fit_window=window)
        report["comparison"] = cmp.to_dict()
    emit(json_text(report), args.output)
    return 0


# verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    numbers = verification.select(args.only)
    results = verification.run_criteria(numbers, args.tolerance, progress=lambda line: print(line, flush=True))
    report = verification.report_dict(results, args.tolerance)
    target = Path(args.output) if args.output else Path(os.environ.get(OUTPUT_ENV) or ".") / "verify_report.json"
    write_text(target, json_text(report))
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed; report in {target}")
    return 0 if report["passed"] else 1


# sweep -------------------------------------------------------------------


def _sweep_cell(job):
    alpha, scheme, n, d, seed, run = job
    result = generate(ProcessParams(n=n, d=d, alpha=alpha, scheme=scheme, seed=seed), run=run)
    hist = degree_histogram(result)
    return [alpha, scheme, n, d, seed, run, int(result.degrees.sum()), hist.max_degree, fitted_exponent(hist, d), 1.0 / alpha]


def cmd_sweep(args) -> int:
    schemes = [str(SchemeSpec.parse(s)) for s in (args.schemes or SWEEP_SCHEMES)]
    alphas = args.alphas or list(SWEEP_ALPHAS)
    for a in alphas:
        check_alpha(a)
    jobs = [(a, s, args.n, args.d, args.seed, k) for k, (a, s) in enumerate((a, s) for a in alphas for s in schemes)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    columns = ["alpha", "scheme", "n", "d", "seed", "run", "sum_degrees", "max_degree", "fitted_exponent", "target_exponent"]
    head = header_line("sweep", {"n": args.n, "d": args.d, "seed": args.seed, "alphas": alphas, "schemes": schemes})
    target = Path(args.output) if args.output else Path(os.environ.get(OUTPUT_ENV) or ".") / "sweep.csv"
    write_text(target, csv_text(head, columns, rows))
    print(f"{len(rows)} cells written to {target}")
    return 0


# parser ------------------------------------------------------------------


def _add_process_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=count_arg, required=True, help="number of vertices (1e6 style accepted)")
    p.add_argument("--d", type=count_arg, default=1, help="edges per new vertex")
    p.add_argument("--alpha", type=float, default=0.5, help="attachment strength in (0, 1)")
    p.add_argument("--scheme", type=scheme_arg, default=SchemeSpec("age"), help=f"one of {', '.join(KINDS)}; random needs :s")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankattach", description="Rank-based attachment graphs and their theory.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="grow graphs and write degree tables")
    _add_process_flags(g)
    g.add_argument("--track", type=int_list_arg, default=[], help="comma-separated vertices to trace")
    g.add_argument("--snapshot-times", type=int_list_arg, default=[])
    g.add_argument("--keep-edges", action="store_true")
    g.add_argument("--checkpoint-ratio", type=float, default=0.1)
    g.add_argument("--pin", type=pin_arg, action="append", default=[], metavar="V=X", help="fix the label or initial rank of v_V")
    g.add_argument("--runs", type=count_arg, default=1)
    g.add_argument("--workers", type=count_arg, default=1)
    g.add_argument("--format", choices=("csv", "json", "npz", "all"), default="csv")
    g.add_argument("--theory-tail", action="store_true", help="add the predicted tail column where one exists")
    g.add_argument("--output", help="output directory")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("theory", help="tabulate closed-form predictions")
    what = t.add_mutually_exclusive_group(required=True)
    what.add_argument("--ck", action="store_true", help="C_k table from the recurrence")
    what.add_argument("--fractions", action="store_true", help="c_k table with its large-k form")
    what.add_argument("--ode", action="store_true", help="degree-ranking ODE solution z_k(x)")
    what.add_argument("--tail", choices=("age", "label", "random-high"))
    what.add_argument("--expected", choices=("age", "inverse-age"))
    t.add_argument("--alpha", type=float, default=0.5)
    t.add_argument("--kmax", type=count_arg, default=100)
    t.add_argument("--kmin", type=count_arg, default=1)
    t.add_argument("--x", type=float_list_arg, default=[1.0])
    t.add_argument("--n", type=count_arg, default=10**6)
    t.add_argument("--d", type=count_arg, default=1)
    t.add_argument("--i", type=int_list_arg, default=[])
    t.add_argument("--output", help="CSV file (default stdout)")
    t.set_defaults(func=cmd_theory)

    a = sub.add_parser("analyze", help="fit and compare a saved result")
    a.add_argument("input", help="result.json or result.npz")
    a.add_argument("--kmin", type=count_arg)
    a.add_argument("--kmax", type=count_arg)
    a.add_argument("--hill-threshold", type=float, default=verification.HILL_THRESHOLD)
    a.add_argument("--tolerance", type=float, default=0.15)
    a.add_argument("--output", help="JSON file (default stdout)")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the verification matrix")
    v.add_argument("--only", help=f"comma-separated criteria or groups ({', '.join(verification.GROUPS)})")
    v.add_argument("--tolerance", type=float, help="replace every stated tolerance")
    v.add_argument("--output", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="alpha x scheme grid, one summary row per cell")
    s.add_argument("--n", type=count_arg, default=10**5)
    s.add_argument("--d", type=count_arg, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alphas", type=float_list_arg)
    s.add_argument("--schemes", type=lambda x: x.split(","))
    s.add_argument("--workers", type=count_arg, default=1)
    s.add_argument("--output", help="CSV file")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"rankattach: failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OverflowError) as exc:  # includes UsageError and parameter validation
        print(f"rankattach: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"rankattach: failed: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
