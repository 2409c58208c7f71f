"""Rank weights ``j**-alpha`` and inverse-CDF sampling of ranks.

Link probabilities depend only on the rank position, never on which vertex
holds it, so a single prefix table built once up to ``t_max`` serves every
time step of a run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ._validation import check_alpha, check_positive_int, check_unit_interval


@numba.njit(cache=True)
def _compensated_prefix(alpha, t_max):
    # Neumaier summation: the compensation term carries the low-order bits
    # that a plain running sum drops once the total dwarfs j**-alpha.
    out = np.empty(t_max, dtype=np.float64)
    s = 0.0
    comp = 0.0
    for j in range(1, t_max + 1):
        term = float(j) ** (-alpha)
        tmp = s + term
        if abs(s) >= abs(term):
            comp += (s - tmp) + term
        else:
            comp += (term - tmp) + s
        s = tmp
        out[j - 1] = s + comp
    return out


@dataclass(frozen=True)
class WeightTable:
    """Prefix sums of the rank weights.

    ``prefix[j - 1]`` holds ``sum(i**-alpha for i in 1..j)``; the array is
    zero-based while ranks are one-based.
    """

    alpha: float
    t_max: int
    prefix: np.ndarray

    def __post_init__(self):
        self.prefix.setflags(write=False)

    def g(self, t: int) -> float:
        return g_alpha(self, t)


def build_weight_table(alpha: float, t_max: int) -> WeightTable:
    alpha = check_alpha(alpha)
    t_max = check_positive_int(t_max, "t_max")
    return WeightTable(alpha, t_max, _compensated_prefix(alpha, t_max))


def _check_t(table: WeightTable, t) -> int:
    t = int(t)
    if not (1 <= t <= table.t_max):
        raise ValueError(f"t must satisfy 1 <= t <= {table.t_max}, got {t}")
    return t


def g_alpha(table: WeightTable, t: int) -> float:
    """Normalising constant ``sum(j**-alpha for j in 1..t)``."""
    return float(table.prefix[_check_t(table, t) - 1])


def sample_rank(table: WeightTable, t: int, u: float) -> int:
    """Smallest rank ``j`` in ``[1, t]`` with ``prefix[j] >= u * prefix[t]``.

    For ``u`` uniform on [0, 1) this returns ``j`` with probability
    ``j**-alpha / g_alpha(t)``.
    """
    t = _check_t(table, t)
    u = check_unit_interval(u)
    target = u * table.prefix[t - 1]
    j = int(np.searchsorted(table.prefix[:t], target, side="left")) + 1
    return min(j, t)


def sample_ranks(table: WeightTable, t, u) -> np.ndarray:
    """Vectorised :func:`sample_rank` over broadcastable ``t`` and ``u``."""
    t, u = np.broadcast_arrays(np.asarray(t, dtype=np.int64), np.asarray(u, dtype=np.float64))
    if t.size and (t.min() < 1 or t.max() > table.t_max):
        raise ValueError(f"t must satisfy 1 <= t <= {table.t_max}")
    if u.size and (u.min() < 0.0 or u.max() >= 1.0):
        raise ValueError("u must lie in [0, 1)")
    target = u * table.prefix[t - 1]
    j = np.searchsorted(table.prefix, target, side="left") + 1
    return np.minimum(j, t)
