"""Degree histograms, power-law fits, a uniformity test and theory comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from scipy.special import kolmogi

from ._validation import check_degrees, check_positive_samples
from .theory import TheoryPrediction

DEFAULT_MIN_TAIL_COUNT = 50
# below this the continuous Hill formula is visibly biased on integer degrees
DEFAULT_HILL_THRESHOLD = 40


class InsufficientDataError(ValueError):
    """Too few observations for the requested estimate."""


@dataclass(frozen=True)
class DegreeHistogram:
    """``counts[k]`` is ``Z_k`` (vertices of degree exactly k); ``tail[k]`` is ``Z_{>=k}``."""

    n: int
    counts: dict
    tail: np.ndarray

    @property
    def max_degree(self) -> int:
        return len(self.tail) - 1

    def tail_at(self, k: int) -> int:
        if k < 0:
            raise ValueError("k must be non-negative")
        return int(self.tail[k]) if k < len(self.tail) else 0

    def total_degree(self) -> int:
        return sum(k * c for k, c in self.counts.items())


def degree_histogram(result_or_degrees) -> DegreeHistogram:
    """Exact histogram of a :class:`ProcessResult` or a raw degree sequence."""
    degrees = getattr(result_or_degrees, "degrees", result_or_degrees)
    degrees = check_degrees(degrees)
    counts = np.bincount(degrees) if degrees.size else np.zeros(1, dtype=np.int64)
    tail = np.cumsum(counts[::-1])[::-1]
    sparse = {int(k): int(counts[k]) for k in np.flatnonzero(counts)}
    return DegreeHistogram(int(degrees.size), sparse, tail)


def histogram_from_counts(counts: Mapping[int, int]) -> DegreeHistogram:
    """Rebuild a histogram from a sparse ``{k: Z_k}`` map (e.g. a snapshot)."""
    if not counts:
        return DegreeHistogram(0, {}, np.zeros(1, dtype=np.int64))
    dense = np.zeros(max(counts) + 1, dtype=np.int64)
    for k, c in counts.items():
        dense[int(k)] = int(c)
    tail = np.cumsum(dense[::-1])[::-1]
    return DegreeHistogram(int(dense.sum()), {int(k): int(c) for k, c in sorted(counts.items()) if c}, tail)


def default_fit_window(hist: DegreeHistogram, d: int, min_count: int = DEFAULT_MIN_TAIL_COUNT) -> tuple[int, int]:
    """``(max(4, d+1), largest k with Z_{>=k} >= min_count)``.

    The lower end skips the atom at the minimum degree ``d``. The window is
    a desk-scale stand-in for the asymptotic ranges of the tail theorems,
    which are empty for any n that fits in memory.
    """
    k_min = max(4, d + 1)
    ok = np.flatnonzero(hist.tail >= min_count)
    k_max = int(ok[-1]) if ok.size else 0
    if k_max < k_min:
        raise InsufficientDataError(f"no k >= {k_min} has at least {min_count} vertices of larger degree")
    return k_min, k_max


class LSFit(NamedTuple):
    exponent: float
    intercept: float
    r_squared: float


def fit_exponent_ls(hist: DegreeHistogram, k_min: int, k_max: int) -> LSFit:
    """Least squares on ``(log k, log Z_{>=k})`` for integer k in the window.

    Returns the negated slope, i.e. the cumulative exponent (``1/alpha``
    for the power-law schemes).
    """
    ks = np.arange(max(1, int(k_min)), int(k_max) + 1)
    ks = ks[ks < len(hist.tail)]
    z = hist.tail[ks]
    ks, z = ks[z > 0], z[z > 0]
    if ks.size < 5:
        raise InsufficientDataError(f"window [{k_min}, {k_max}] has {ks.size} usable points, need 5")
    x = np.log(ks.astype(np.float64))
    y = np.log(z.astype(np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LSFit(float(-slope), float(intercept), r2)


def fit_exponent_hill(degrees, k_threshold: float, min_tail: int = 100, discrete: bool = False) -> float:
    """Maximum-likelihood pdf exponent ``1 + m / sum(log(d_j / k_threshold))``.

    Uses the ``m`` observations at or above ``k_threshold``; they need not
    be integers. ``discrete=True`` divides by ``k_threshold - 1/2`` instead,
    the usual correction for integer data.
    """
    x = check_positive_samples(degrees, "degrees")
    if not k_threshold > 0:
        raise ValueError("k_threshold must be positive")
    tail = x[x >= k_threshold]
    if tail.size < min_tail:
        raise InsufficientDataError(f"{tail.size} observations >= {k_threshold}, need {min_tail}")
    x_min = k_threshold - 0.5 if discrete else float(k_threshold)
    log_sum = float(np.sum(np.log(tail / x_min)))
    if log_sum <= 0.0:
        raise InsufficientDataError("all tail observations equal the threshold; exponent undefined")
    return 1.0 + tail.size / log_sum


class KSResult(NamedTuple):
    statistic: float
    critical_value: float
    passed: bool
    level: float


def ks_uniform_test(samples: Iterable[float], level: float = 1e-3) -> KSResult:
    """One-sample Kolmogorov-Smirnov test against Uniform(0, 1).

    The critical value is the asymptotic one, ``K^{-1}(level) / sqrt(m)``
    with ``K`` the Kolmogorov distribution.
    """
    x = np.sort(np.asarray(list(samples), dtype=np.float64))
    m = x.size
    if m < 100:
        raise InsufficientDataError(f"KS test needs at least 100 samples, got {m}")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("samples must lie in [0, 1]")
    i = np.arange(1, m + 1)
    stat = float(max(np.max(i / m - x), np.max(x - (i - 1) / m)))
    crit = float(kolmogi(level)) / math.sqrt(m)
    return KSResult(stat, crit, stat <= crit, level)


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    index: float
    empirical: float
    theoretical: float
    relative_error: float
    passed: bool


@dataclass
class ComparisonReport:
    rows: list = field(default_factory=list)
    tolerance: float = 0.0
    fitted_exponent: float | None = None
    fit_window: tuple | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def max_relative_error(self) -> float:
        return max((r.relative_error for r in self.rows), default=0.0)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "fitted_exponent": self.fitted_exponent,
            "fit_window": list(self.fit_window) if self.fit_window else None,
            "rows": [r.__dict__ for r in self.rows],
        }


def relative_error(empirical: float, theoretical: float) -> float:
    """``|emp - theo| / max(theo, 1)``; the floor stops blow-up near zero."""
    return abs(empirical - theoretical) / max(theoretical, 1.0)


def compare_report(
    empirical: Mapping[tuple, float],
    predictions: Iterable[TheoryPrediction],
    tolerance: float,
    *,
    fitted_exponent: float | None = None,
    fit_window: tuple | None = None,
) -> ComparisonReport:
    """One row per prediction; ``empirical`` is keyed by ``(quantity, index)``."""
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    rows = []
    for p in predictions:
        if p.key not in empirical:
            raise KeyError(f"no empirical value for {p.key}")
        emp = float(empirical[p.key])
        err = relative_error(emp, p.value)
        rows.append(ComparisonRow(p.quantity, p.index, emp, p.value, err, err <= tolerance))
    return ComparisonReport(rows, tolerance, fitted_exponent, fit_window)


def empirical_tail(hist: DegreeHistogram, ks: Iterable[int]) -> dict:
    """``{("tail_count", k): Z_{>=k}}`` ready for :func:`compare_report`."""
    return {("tail_count", int(k)): hist.tail_at(int(k)) for k in ks}


def mean_tail(hists: Iterable[DegreeHistogram]) -> DegreeHistogram:
    """Ensemble-averaged histogram (counts become floats)."""
    hists = list(hists)
    if not hists:
        raise ValueError("no histograms to average")
    width = max(len(h.tail) for h in hists)
    tail = np.zeros(width)
    for h in hists:
        tail[: len(h.tail)] += h.tail
    tail /= len(hists)
    counts = np.append(tail[:-1] - tail[1:], tail[-1])
    sparse = {int(k): float(counts[k]) for k in np.flatnonzero(counts)}
    return DegreeHistogram(int(round(tail[0])), sparse, tail)
