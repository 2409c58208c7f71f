"""Desk-scale verification matrix: twelve numbered criteria.

Each criterion returns a :class:`CriterionResult` made of named checks.
A check carries the measured value, its target and the tolerance it was
held to, so a failure says by how much. ``tolerance`` (if given) replaces
every stated tolerance; hard bounds such as runtime and memory limits are
not tolerances and stay fixed.
"""

from __future__ import annotations

import math
import resource
import tempfile
import time
import tracemalloc
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import chisquare

from .generator import ProcessParams, generate, run_ensemble
from .stats import (
    DEFAULT_HILL_THRESHOLD,
    ComparisonReport,
    compare_report,
    default_fit_window,
    degree_histogram,
    fit_exponent_hill,
    fit_exponent_ls,
    ks_uniform_test,
    mean_tail,
    relative_error,
)
from .theory import (
    TheoryPrediction,
    exact_expected_degree,
    expected_degree_age,
    integrate_degree_ode,
    r_star,
    rank_trajectory_high_s,
    rank_trajectory_low_s,
    solve_Ck,
    tail_predictions,
)
from .weights import build_weight_table, sample_ranks

HILL_THRESHOLD = DEFAULT_HILL_THRESHOLD
PERFORMANCE_SCHEMES = ("age", "inverse-age", "label", "random:1", "degree")


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float | None
    passed: bool
    note: str = ""

    def __post_init__(self):
        self.value = float(self.value)
        self.target = float(self.target)
        self.passed = bool(self.passed)

    def describe(self) -> str:
        tol = "" if self.tolerance is None else f" tol={self.tolerance:g}"
        return f"{self.name}: {self.value:.6g} vs {self.target:.6g}{tol}{' ' + self.note if self.note else ''}"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.describe() for c in self.checks if not c.passed]
        tail = "; ".join(failed) if failed else f"{len(self.checks)} checks"
        return f"[{status}] criterion {self.number:2d} {self.title} ({self.elapsed:.1f}s): {tail}"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "elapsed_s": float(self.elapsed),
            "checks": [c.__dict__ for c in self.checks],
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
            "info": self.info,
        }


def _tol(stated: float, override: float | None) -> float:
    return stated if override is None else override


def _within_abs(name, value, target, tol, note="") -> Check:
    return Check(name, float(value), float(target), tol, abs(value - target) <= tol, note)


def _within_rel(name, value, target, tol, note="") -> Check:
    return Check(name, float(value), float(target), tol, relative_error(value, target) <= tol, note)


def _at_most(name, value, bound, note="") -> Check:
    return Check(name, float(value), float(bound), None, value <= bound, note)


def _tail_check(name: str, report: ComparisonReport) -> Check:
    worst = max(report.rows, key=lambda r: r.relative_error)
    note = f"worst at k={worst.index:g}; {sum(not r.passed for r in report.rows)}/{len(report.rows)} rows fail"
    return Check(name, report.max_relative_error, 0.0, report.tolerance, report.passed, note)


def _tail_report(scheme, hist, n, d, alpha, tol) -> ComparisonReport:
    window = default_fit_window(hist, d)
    ks = range(window[0], window[1] + 1)
    preds = tail_predictions(scheme, ks, n, d, alpha)
    emp = {("tail_count", k): float(hist.tail[k]) for k in ks}
    fit = fit_exponent_ls(hist, *window)
    return compare_report(emp, preds, tol, fitted_exponent=fit.exponent, fit_window=window)


def _ensemble(n, d, alpha, scheme, seed, runs, **extra):
    params = ProcessParams(n=n, d=d, alpha=alpha, scheme=scheme, seed=seed, **extra)
    return run_ensemble(params, runs)


# individual criteria ----------------------------------------------------


def criterion_1(tolerance=None) -> CriterionResult:
    res = CriterionResult(1, "C_k solver asymptotics")
    t0 = time.perf_counter()
    for alpha in (0.3, 0.5, 0.7):
        table = solve_Ck(alpha, 10**4)
        res.checks.append(_within_rel(f"B_10^4 alpha={alpha}", table.B[-1], table.c_alpha, _tol(0.02, tolerance)))
    table = solve_Ck(0.5, 1)
    res.checks.append(_within_abs("C_1 alpha=0.5", table.C[1], (3 - math.sqrt(5)) / 2, _tol(1e-12, tolerance)))
    res.elapsed = time.perf_counter() - t0
    res.checks.append(_at_most("runtime_s", res.elapsed, 1.0))
    return res


def criterion_2(tolerance=None) -> CriterionResult:
    res = CriterionResult(2, "degree ODE vs recurrence")
    t0 = time.perf_counter()
    z = integrate_degree_ode(0.5, 5)[0]
    c = solve_Ck(0.5, 5).c
    for k in range(1, 6):
        res.checks.append(_within_abs(f"z_{k}(1)", z[k - 1], c[k], _tol(1e-3, tolerance)))
    res.elapsed = time.perf_counter() - t0
    res.checks.append(_at_most("runtime_s", res.elapsed, 5.0))
    return res


def criterion_3(tolerance=None, seed=3) -> CriterionResult:
    res = CriterionResult(3, "degree ranking: c_1, exponent, Hill")
    t0 = time.perf_counter()
    n, alpha = 5 * 10**5, 0.5
    runs = _ensemble(n, 1, alpha, "degree", seed, 5)
    c1 = solve_Ck(alpha, 1).c[1]
    for k, r in enumerate(runs):
        y1 = np.count_nonzero(r.degrees == 1) / n
        res.checks.append(_within_abs(f"Y_1/n run {k}", y1, c1, _tol(0.01, tolerance)))
    hist = mean_tail(degree_histogram(r) for r in runs)
    fit = fit_exponent_ls(hist, 4, 40)
    res.checks.append(_within_abs("LS exponent k in [4,40]", fit.exponent, 1 / alpha, _tol(0.2, tolerance)))
    pooled = np.concatenate([r.degrees for r in runs])
    hill = fit_exponent_hill(pooled, HILL_THRESHOLD)
    res.checks.append(
        _within_abs("Hill pdf exponent", hill, 1 + 1 / alpha, _tol(0.3, tolerance), f"threshold {HILL_THRESHOLD}")
    )
    res.info["hill_threshold_10"] = fit_exponent_hill(pooled, 10)
    res.elapsed = time.perf_counter() - t0
    res.checks.append(_at_most("runtime_s", res.elapsed, 60.0))
    return res


def criterion_4(tolerance=None, seed=4) -> CriterionResult:
    res = CriterionResult(4, "age ranking: mean degree and tail")
    t0 = time.perf_counter()
    n, d, alpha, i = 10**5, 2, 0.6, 10**3
    runs = _ensemble(n, d, alpha, "age", seed, 20)
    mean_deg = float(np.mean([r.degrees[i - 1] for r in runs]))
    res.checks.append(
        _within_rel(f"mean deg(v_{i})", mean_deg, expected_degree_age(i, n, d, alpha), _tol(0.05, tolerance))
    )
    res.info["exact_mean_degree"] = exact_expected_degree(build_weight_table(alpha, n), "age", i, n, d)
    report = _tail_report("age", mean_tail(degree_histogram(r) for r in runs), n, d, alpha, _tol(0.10, tolerance))
    res.reports["tail"] = report
    res.checks.append(_tail_check("Z_>=k vs tail_age", report))
    res.elapsed = time.perf_counter() - t0
    res.checks.append(_at_most("runtime_s", res.elapsed, 60.0))
    return res


def criterion_5(tolerance=None, seed=5) -> CriterionResult:
    res = CriterionResult(5, "inverse-age ranking: logarithmic degrees")
    t0 = time.perf_counter()
    n, d, alpha = 10**4, 1, 0.5
    runs = _ensemble(n, d, alpha, "inverse-age", seed, 200)
    mean_deg = float(np.mean([r.degrees[0] for r in runs]))
    res.checks.append(_within_rel("mean deg(v_1)", mean_deg, 1 + 0.5 * math.log(n), _tol(0.10, tolerance)))
    res.info["exact_mean_degree"] = exact_expected_degree(build_weight_table(alpha, n), "inverse-age", 1, n, d)
    max_deg = max(int(r.degrees.max()) for r in runs)
    res.checks.append(_at_most("max degree", max_deg, 10 * d * math.log(n)))
    res.elapsed = time.perf_counter() - t0
    res.checks.append(_at_most("runtime_s", res.elapsed, 60.0))
    return res


def _label_like(scheme, seed):
    runs = _ensemble(5 * 10**5, 1, 0.5, scheme, seed, 5)
    return mean_tail(degree_histogram(r) for r in runs)


def criterion_6(tolerance=None, seed=6) -> CriterionResult:
    res = CriterionResult(6, "label ranking: tail and exponent")
    t0 = time.perf_counter()
    n, d, alpha = 5 * 10**5, 1, 0.5
    hist = _label_like("label", seed)
    report = _tail_report("label", hist, n, d, alpha, _tol(0.15, tolerance))
    res.reports["tail"] = report
    res.checks.append(_tail_check("Z_>=k vs tail_label", report))
    res.checks.append(_within_abs("LS exponent", report.fitted_exponent, 1 / alpha, _tol(0.2, tolerance)))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_7(tolerance=None, seed=7) -> CriterionResult:
    res = CriterionResult(7, "random ranking s=1: label equivalence, uniform limit")
    t0 = time.perf_counter()
    label = _label_like("label", seed)
    random1 = _label_like("random:1", seed)
    e_label = fit_exponent_ls(label, *default_fit_window(label, 1)).exponent
    e_rand = fit_exponent_ls(random1, *default_fit_window(random1, 1)).exponent
    res.checks.append(_within_abs("exponent random:1 vs label", e_rand, e_label, _tol(0.1, tolerance)))
    n = 10**4
    table = build_weight_table(0.5, n)
    params = ProcessParams(n=n, d=1, alpha=0.5, scheme="random:1", seed=seed, track=(1,))
    samples = [generate(params, table, run=k).trajectories[1][-1, 1] / n for k in range(500)]
    ks = ks_uniform_test(samples, 1e-3)
    res.checks.append(Check("KS r(v_1,n)/n", ks.statistic, ks.critical_value, None, ks.passed, "level 1e-3"))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_8(tolerance=None, seed=8, runs=20) -> CriterionResult:
    res = CriterionResult(8, "random ranking s=2: rank convergence and age-type tail")
    t0 = time.perf_counter()
    n, d, alpha, s, i, R_i = 10**5, 1, 0.5, 2.0, 1000, 100
    results = _ensemble(n, d, alpha, f"random:{s}", seed, runs, track=(i,), pinned={i: R_i})
    rs = r_star(R_i, i, s)
    traj = np.stack([r.trajectories[i] for r in results])  # same checkpoint times in every run
    times = traj[0, :, 0]
    keep = times >= 10 * rs
    mean_rank = traj[:, keep, 1].mean(axis=0)
    pred = rank_trajectory_high_s(rs, times[keep], s)
    preds = [TheoryPrediction(f"random:{s}", "rank_trajectory", int(t), float(p)) for t, p in zip(times[keep], pred)]
    emp = {("rank_trajectory", int(t)): float(m) for t, m in zip(times[keep], mean_rank)}
    report = compare_report(emp, preds, _tol(0.05, tolerance))
    res.reports["trajectory"] = report
    res.checks.append(_tail_check(f"ensemble-mean rank of v_{i}", report))
    per_run = np.max(np.abs(traj[:, keep, 1] - pred) / pred, axis=1)
    res.info["per_run_max_rel_error"] = per_run.tolist()
    res.info["R_star"] = rs
    tail = _tail_report(f"random:{s}", mean_tail(degree_histogram(r) for r in results), n, d, alpha, _tol(0.15, tolerance))
    res.reports["tail"] = tail
    res.checks.append(_tail_check("Z_>=k vs tail_age", tail))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_9(tolerance=None, seed=9) -> CriterionResult:
    res = CriterionResult(9, "random ranking s=0.5: drift to the bottom, log degrees")
    t0 = time.perf_counter()
    n, d, alpha, s = 10**5, 1, 0.5, 0.5
    tracked = (100, 500)
    results = _ensemble(n, d, alpha, f"random:{s}", seed, 20, track=tracked)
    worst = 0.0
    for r in results:
        for i in tracked:
            traj = r.trajectories[i]
            R_i = int(traj[0, 1])  # rank at birth is the initial rank
            late = traj[traj[:, 0] >= 100 * i]
            pred = rank_trajectory_low_s(R_i, i, late[:, 0], s)
            worst = max(worst, float(np.max(np.abs(late[:, 1] - pred) / pred)))
    res.checks.append(Check("max rel error of tracked ranks", worst, 0.0, _tol(0.05, tolerance), worst <= _tol(0.05, tolerance)))
    max_deg = max(int(r.degrees.max()) for r in results)
    res.checks.append(_at_most("max degree", max_deg, 10 * d * math.log(n)))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_10(tolerance=None, seed=10, draws=10**7) -> CriterionResult:
    res = CriterionResult(10, "rank sampler law")
    t0 = time.perf_counter()
    t, alpha = 1000, 0.5
    table = build_weight_table(alpha, t)
    p = np.arange(1, t + 1, dtype=np.float64) ** -alpha / table.g(t)
    # exhaustive: every cell of a uniform grid of inputs, so no sampling noise
    grid = (np.arange(draws, dtype=np.float64) + 0.5) / draws
    counts = np.bincount(sample_ranks(table, t, grid), minlength=t + 1)[1:]
    tv = 0.5 * float(np.abs(counts / draws - p).sum())
    res.checks.append(Check("TV over input grid", tv, 0.0, _tol(2e-3, tolerance), tv < _tol(2e-3, tolerance)))
    rng = np.random.Generator(np.random.Philox(seed))
    counts = np.bincount(sample_ranks(table, t, rng.random(draws)), minlength=t + 1)[1:]
    chi = chisquare(counts, draws * p)
    res.checks.append(Check("chi-square p-value", float(chi.pvalue), 1e-3, None, chi.pvalue >= 1e-3))
    res.info["tv_random_draws"] = 0.5 * float(np.abs(counts / draws - p).sum())
    res.info["tv_noise_floor"] = float(0.5 * math.sqrt(2 / math.pi) * np.sqrt(p).sum() / math.sqrt(draws))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_11(tolerance=None, n=10**6, d=2) -> CriterionResult:
    res = CriterionResult(11, "performance at n=10^6, d=2")
    t0 = time.perf_counter()
    for scheme in PERFORMANCE_SCHEMES:
        generate(ProcessParams(n=100, d=d, scheme=scheme))  # load compiled kernels
        params = ProcessParams(n=n, d=d, alpha=0.5, scheme=scheme, seed=11)
        tracemalloc.start()
        t1 = time.perf_counter()
        generate(params)
        elapsed = time.perf_counter() - t1
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        res.checks.append(_at_most(f"{scheme} seconds", elapsed, 10.0))
        res.checks.append(_at_most(f"{scheme} peak MB", peak / 2**20, 1024.0))
    # numba-side temporaries escape tracemalloc; the process high-water mark bounds everything
    res.info["process_max_rss_mb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    res.checks.append(_at_most("process max RSS MB", res.info["process_max_rss_mb"], 1024.0))
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_12(tolerance=None) -> CriterionResult:
    from .cli import main

    res = CriterionResult(12, "byte-identical reruns")
    t0 = time.perf_counter()
    argv = ["--n", "20000", "--d", "2", "--alpha", "0.5", "--scheme", "random:2", "--seed", "12", "--track", "100"]
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for k in range(2):
            out = Path(tmp) / f"run{k}"
            code = main(["generate", *argv, "--output", str(out), "--format", "all"])
            if code != 0:
                res.checks.append(Check(f"generate exit code run {k}", code, 0, None, False))
                return res
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        same = outs[0] == outs[1] and len(outs[0]) > 0
        res.checks.append(Check("identical files", float(same), 1.0, None, same, f"{len(outs[0])} files"))
    res.elapsed = time.perf_counter() - t0
    return res


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}

GROUPS = {
    "ck": (1, 2),
    "degree": (1, 2, 3),
    "age": (4,),
    "inverse-age": (5,),
    "label": (6, 7),
    "random": (7, 8, 9),
    "sampler": (10,),
    "performance": (11,),
    "determinism": (12,),
}


def select(only: str | None) -> list[int]:
    """Parse ``--only``: comma-separated group names and/or criterion numbers."""
    if not only:
        return sorted(CRITERIA)
    chosen = set()
    for part in only.split(","):
        part = part.strip()
        if part in GROUPS:
            chosen.update(GROUPS[part])
        elif part.isdigit() and int(part) in CRITERIA:
            chosen.add(int(part))
        else:
            raise ValueError(f"unknown criterion or group {part!r}; groups: {', '.join(GROUPS)}")
    return sorted(chosen)


def run_criteria(numbers, tolerance: float | None = None, progress: Callable[[str], None] | None = None) -> list:
    if tolerance is not None and tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    out = []
    for k in numbers:
        res = CRITERIA[k](tolerance=tolerance)
        out.append(res)
        if progress is not None:
            progress(res.summary_line())
    return out


def report_dict(results, tolerance: float | None = None) -> dict:
    return {
        "schema": 1,
        "tolerance_override": tolerance,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
