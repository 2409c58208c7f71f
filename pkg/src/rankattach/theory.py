"""Closed-form and numerical predictions for rank-based attachment.

Logarithms are natural throughout. Degrees count a loop twice, so ``v_1``
starts with degree ``2d``; the formulas below are the asymptotic ones and do
not carry that O(1) correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from ._validation import check_alpha, check_positive_int
from .ranking import SchemeSpec
from .weights import WeightTable


class ConvergenceError(RuntimeError):
    """Numerical integration left the region where the solution can live."""


@numba.njit(cache=True)
def _ck_recurrence(alpha, k_max):
    a = 1.0 - alpha
    C = np.empty(k_max + 1)
    C[0] = 1.0
    for k in range(1, k_max + 1):
        rhs = C[k - 1] ** a
        lo = 0.0
        hi = C[k - 1]
        # x + x**a is strictly increasing; bisect until the bracket stops shrinking
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if mid + mid**a < rhs:
                lo = mid
            else:
                hi = mid
        C[k] = hi if (hi + hi**a - rhs) <= (rhs - lo - lo**a) else lo
    return C


@dataclass(frozen=True)
class CkTable:
    """Solution of ``C_k + C_k**(1-alpha) = C_{k-1}**(1-alpha)`` with ``C_0 = 1``.

    ``C[k]`` is the limiting fraction of vertices with degree above ``k``
    under degree ranking (d = 1) and ``c[k] = C[k-1] - C[k]`` the fraction
    with degree exactly ``k``; ``c[0]`` is unused and set to NaN.
    """

    alpha: float
    C: np.ndarray
    c: np.ndarray
    c_alpha: float

    @property
    def k_max(self) -> int:
        return len(self.C) - 1

    @property
    def B(self) -> np.ndarray:
        """``C_k * k**(1/alpha)``, which converges to ``c_alpha``; ``B[0]`` is NaN."""
        k = np.arange(len(self.C), dtype=np.float64)
        out = self.C * k ** (1.0 / self.alpha)
        out[0] = np.nan
        return out


def c_alpha(alpha: float) -> float:
    alpha = check_alpha(alpha)
    return ((1.0 - alpha) / alpha) ** (1.0 / alpha)


def solve_Ck(alpha: float, k_max: int) -> CkTable:
    alpha = check_alpha(alpha)
    k_max = check_positive_int(k_max, "k_max")
    C = _ck_recurrence(alpha, k_max)
    c = np.empty_like(C)
    c[0] = np.nan
    c[1:] = C[:-1] - C[1:]
    C.setflags(write=False)
    c.setflags(write=False)
    return CkTable(alpha, C, c, c_alpha(alpha))


def degree_fraction(table: CkTable, k: int) -> float:
    """Predicted ``Y_k(n) / n`` under degree ranking with ``d = 1``."""
    if not 1 <= k <= table.k_max:
        raise ValueError(f"k must lie in [1, {table.k_max}], got {k}")
    return float(table.c[k])


def degree_fraction_asymptotic(alpha: float, k) -> float | np.ndarray:
    """Large-``k`` form ``(1/alpha) * c_alpha * k**-(1 + 1/alpha)``."""
    alpha = check_alpha(alpha)
    return (1.0 / alpha) * c_alpha(alpha) * np.power(k, -(1.0 + 1.0 / alpha))


@numba.njit(cache=True)
def _degree_rhs(z, x, a, out):
    k_max = z.shape[0]
    # base[j] = max(0, 1 - (z_1 + ... + z_j) / x) ** a for j = 0..k_max
    prev2 = 1.0  # j = k - 2 (S_{-1} never used: k = 1 has its own form)
    s = 0.0
    prev1 = 1.0  # j = 0
    for k in range(k_max):
        s += z[k]
        b = 1.0 - s / x
        cur = b**a if b > 0.0 else 0.0
        if k == 0:
            out[0] = cur
        else:
            out[k] = prev2 - 2.0 * prev1 + cur
        prev2 = prev1
        prev1 = cur
    return s


@numba.njit(cache=True)
def _rk4_degree(a, k_max, x0, h, xs):
    z = np.zeros(k_max)
    k1 = np.empty(k_max)
    k2 = np.empty(k_max)
    k3 = np.empty(k_max)
    k4 = np.empty(k_max)
    tmp = np.empty(k_max)
    out = np.empty((xs.shape[0], k_max))
    x = x0
    idx = 0
    bad = False
    while idx < xs.shape[0]:
        target = xs[idx]
        while x < target:
            step = min(h, target - x)
            _degree_rhs(z, x, a, k1)
            for j in range(k_max):
                tmp[j] = z[j] + 0.5 * step * k1[j]
            _degree_rhs(tmp, x + 0.5 * step, a, k2)
            for j in range(k_max):
                tmp[j] = z[j] + 0.5 * step * k2[j]
            _degree_rhs(tmp, x + 0.5 * step, a, k3)
            for j in range(k_max):
                tmp[j] = z[j] + step * k3[j]
            _degree_rhs(tmp, x + step, a, k4)
            total = 0.0
            for j in range(k_max):
                z[j] += step * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0
                total += z[j]
            x += step
            if total > x * (1.0 + 1e-9):
                bad = True
                break
        if bad:
            break
        out[idx, :] = z
        idx += 1
    return out, bad, x


def integrate_degree_ode(
    alpha: float,
    k_max: int,
    x0: float = 1e-6,
    h: float = 1e-5,
    xs=(1.0,),
) -> np.ndarray:
    """RK4 solution of the degree-ranking fluid limit, sampled at ``xs``.

    Starts from ``z(x0) = 0``; the linear solutions ``z_k(x) = c_k x`` attract
    nearby trajectories, so the singular start at 0 is avoided harmlessly.
    Returns an array of shape ``(len(xs), k_max)``; row ``m`` column ``k-1``
    is ``z_k(xs[m])``.
    """
    alpha = check_alpha(alpha)
    k_max = check_positive_int(k_max, "k_max")
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    if not 0.0 < x0 < 1.0 or h <= 0.0:
        raise ValueError("need 0 < x0 < 1 and h > 0")
    if np.any(np.diff(xs) < 0) or xs[0] < x0:
        raise ValueError("xs must be sorted and not below x0")
    out, bad, x = _rk4_degree(1.0 - alpha, k_max, float(x0), float(h), xs)
    if bad:
        raise ConvergenceError(f"sum of z exceeded x at x={x:.6g}; step size too large?")
    return out


def expected_degree_age(i, n, d, alpha):
    """Expected ``deg(v_i, n)`` under age ranking."""
    alpha = check_alpha(alpha)
    ratio = np.asarray(n, dtype=np.float64) / np.asarray(i, dtype=np.float64)
    val = d * (1.0 - alpha) / alpha * (ratio**alpha + (2.0 * alpha - 1.0) / (1.0 - alpha))
    return float(val) if np.ndim(val) == 0 else val


def tail_age(k, n, d, alpha):
    """Predicted ``Z_{>=k}`` for age ranking (also random ranking with s > 1)."""
    alpha = check_alpha(alpha)
    val = n * ((1.0 - alpha) / alpha * d / np.asarray(k, dtype=np.float64)) ** (1.0 / alpha)
    return float(val) if np.ndim(val) == 0 else val


def expected_degree_inverse_age_bounds(i, n, d, alpha) -> tuple[float, float]:
    """Lower and upper asymptotic bounds on ``E deg(v_i, n)`` for inverse-age ranking."""
    alpha = check_alpha(alpha)
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    if i == n:
        return float(d), float(d)
    log_term = d * (1.0 - alpha) * math.log(n - i)
    return d + alpha * log_term, d + log_term


def expected_degree_label(i, n, d, alpha, label):
    """Expected ``deg(v_i, n)`` for a vertex with the given label."""
    alpha = check_alpha(alpha)
    if not 0.0 < label < 1.0:
        raise ValueError(f"label must lie in (0, 1), got {label}")
    return d + d * (1.0 - alpha) * label ** (-alpha) * math.log(n / i)


def tail_label(k, n, d, alpha):
    """Predicted ``Z_{>=k}`` for label ranking (and random ranking with s = 1)."""
    alpha = check_alpha(alpha)
    # log space: for small alpha the power underflows long before Gamma overflows
    k = np.asarray(k, dtype=np.float64)
    val = np.exp(math.log(n) + np.log(d * (1.0 - alpha) / k) / alpha + math.lgamma(1.0 / alpha + 1.0))
    return float(val) if np.ndim(val) == 0 else val


def r_star(R_i, i, s):
    """Limiting rank ``(R_i**(1-s) - (i+1)**(1-s))**(-1/(s-1))`` for ``s > 1``."""
    if not s > 1.0:
        raise ValueError(f"r_star needs s > 1, got {s}; use rank_trajectory_low_s for s < 1")
    if not 1 <= R_i <= i:
        raise ValueError(f"need 1 <= R_i <= i, got R_i={R_i}, i={i}")
    return (R_i ** (1.0 - s) - (i + 1.0) ** (1.0 - s)) ** (-1.0 / (s - 1.0))


def rank_trajectory_high_s(R_star, t, s):
    """Predicted ``r(v_i, t)`` for ``s > 1``; increases towards ``R_star``."""
    if not s > 1.0:
        raise ValueError(f"need s > 1, got {s}")
    t = np.asarray(t, dtype=np.float64)
    val = R_star * (1.0 + (R_star / (t + 1.0)) ** (s - 1.0)) ** (-1.0 / (s - 1.0))
    return float(val) if np.ndim(val) == 0 else val


def expected_degree_high_s(R_star, n, d, alpha):
    alpha = check_alpha(alpha)
    if R_star < 1:
        raise ValueError(f"R_star must be >= 1, got {R_star}")
    return d * (1.0 - alpha) / alpha * (n / R_star) ** alpha


def low_s_drift_constant(R_i, i, s) -> float:
    """``(i+1)**(1-s) - R_i**(1-s)``: the conserved quantity, made positive."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"need 0 < s < 1, got {s}")
    if not 1 <= R_i <= i:
        raise ValueError(f"need 1 <= R_i <= i, got R_i={R_i}, i={i}")
    return (i + 1.0) ** (1.0 - s) - R_i ** (1.0 - s)


def rank_trajectory_low_s(R_i, i, t, s):
    """Predicted ``r(v_i, t)`` for ``s < 1``: ``t - A/(1-s) * t**s``."""
    A = low_s_drift_constant(R_i, i, s)
    t = np.asarray(t, dtype=np.float64)
    val = t - A / (1.0 - s) * t**s
    return float(val) if np.ndim(val) == 0 else val


def alpha_from_exponent(gamma: float, clip: bool = False) -> float:
    """Attachment strength ``1 / (gamma - 1)`` matching a pdf exponent ``gamma``.

    Values outside (0, 1) are returned as is unless ``clip`` is set, in which
    case they are pulled just inside the interval.
    """
    if not gamma > 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    a = 1.0 / (gamma - 1.0)
    if clip:
        a = min(max(a, 1e-9), 1.0 - 1e-9)
    return a


def exact_expected_degree(table: WeightTable, scheme: SchemeSpec | str, i: int, n: int, d: int) -> float:
    """``E deg(v_i, n)`` computed exactly for the two deterministic schemes.

    Each substep hits ``v_i`` independently with probability
    ``r(v_i, t-1)**-alpha / g(t-1)``, so the expectation is a finite sum.
    Includes the ``2d`` loop endpoints of ``v_1``.
    """
    if isinstance(scheme, str):
        scheme = SchemeSpec.parse(scheme)
    if not 1 <= i <= n <= table.t_max:
        raise ValueError("need 1 <= i <= n <= t_max")
    prev = np.arange(i, n, dtype=np.int64)  # t - 1 for t = i+1..n
    g = table.prefix[prev - 1]
    if scheme.kind == "age":
        w = float(i) ** -table.alpha / g
    elif scheme.kind == "inverse-age":
        w = (prev - i + 1.0) ** -table.alpha / g
    else:
        raise ValueError(f"no exact expectation for scheme {scheme}")
    base = 2 * d if i == 1 else d
    return base + d * float(np.sum(w))


@dataclass(frozen=True)
class TheoryPrediction:
    """One evaluated formula. ``quantity`` is one of ``QUANTITIES``."""

    scheme: str
    quantity: str
    index: float
    value: float
    arguments: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"prediction {self.quantity}[{self.index}] is not finite")

    @property
    def key(self) -> tuple[str, float]:
        return (self.quantity, self.index)


QUANTITIES = ("expected_degree", "tail_count", "rank_trajectory", "degree_fraction")


def tail_predictions(scheme: SchemeSpec | str, ks, n: int, d: int, alpha: float) -> list[TheoryPrediction]:
    """``Z_{>=k}`` predictions appropriate to ``scheme``."""
    if isinstance(scheme, str):
        scheme = SchemeSpec.parse(scheme)
    if scheme.kind == "age" or (scheme.kind == "random" and scheme.s > 1):
        f = tail_age
    elif scheme.kind == "label" or (scheme.kind == "random" and scheme.s == 1):
        f = tail_label
    else:
        raise ValueError(f"no power-law tail prediction for scheme {scheme}")
    args = {"n": n, "d": d, "alpha": alpha}
    return [TheoryPrediction(str(scheme), "tail_count", int(k), f(int(k), n, d, alpha), args) for k in ks]
