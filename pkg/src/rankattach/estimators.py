"""Tail-exponent estimators with the scikit-learn estimator interface.

Both take a degree sequence as ``X`` (1-d, or an ``(n, 1)`` column) and
expose ``exponent_`` plus the implied attachment strength ``alpha_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_degrees, check_positive_samples
from .stats import DEFAULT_HILL_THRESHOLD, DEFAULT_MIN_TAIL_COUNT, default_fit_window, degree_histogram, fit_exponent_hill, fit_exponent_ls
from .theory import alpha_from_exponent


def _column(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of degrees, got shape {X.shape}")
        X = X[:, 0]
    return X


class TailExponentLS(BaseEstimator):
    """Least-squares fit of ``log Z_{>=k}`` against ``log k``.

    With ``k_min``/``k_max`` left as None the default window is used:
    ``k_min = max(4, d + 1)`` and ``k_max`` the largest k whose tail count is
    at least ``min_count``.

    Attributes
    ----------
    exponent_ : cumulative exponent (target ``1/alpha``)
    alpha_ : ``1 / exponent_``
    intercept_, r_squared_, window_
    """

    def __init__(self, k_min=None, k_max=None, d=1, min_count=DEFAULT_MIN_TAIL_COUNT):
        self.k_min = k_min
        self.k_max = k_max
        self.d = d
        self.min_count = min_count

    def fit(self, X, y=None):
        hist = degree_histogram(check_degrees(_column(X)))
        lo, hi = self.k_min, self.k_max
        if lo is None or hi is None:
            dlo, dhi = default_fit_window(hist, self.d, self.min_count)
            lo = dlo if lo is None else lo
            hi = dhi if hi is None else hi
        fit = fit_exponent_ls(hist, lo, hi)
        self.exponent_ = fit.exponent
        self.intercept_ = fit.intercept
        self.r_squared_ = fit.r_squared
        self.window_ = (int(lo), int(hi))
        self.alpha_ = 1.0 / fit.exponent
        return self

    def predict(self, k):
        """Fitted ``Z_{>=k}`` curve."""
        check_is_fitted(self, "exponent_")
        k = np.asarray(k, dtype=np.float64)
        return np.exp(self.intercept_) * k ** (-self.exponent_)


class HillEstimator(BaseEstimator):
    """Maximum-likelihood pdf exponent from the degrees at or above ``k_threshold``.

    Attributes
    ----------
    exponent_ : pdf exponent (target ``1 + 1/alpha``)
    alpha_ : ``1 / (exponent_ - 1)``, unclipped
    n_tail_ : number of observations used
    """

    def __init__(self, k_threshold=DEFAULT_HILL_THRESHOLD, min_tail=100, discrete=False):
        self.k_threshold = k_threshold
        self.min_tail = min_tail
        self.discrete = discrete

    def fit(self, X, y=None):
        degrees = check_positive_samples(_column(X), "X")
        self.exponent_ = fit_exponent_hill(degrees, self.k_threshold, self.min_tail, self.discrete)
        self.n_tail_ = int(np.count_nonzero(degrees >= self.k_threshold))
        self.alpha_ = alpha_from_exponent(self.exponent_)
        return self
