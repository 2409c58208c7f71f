from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rankattach.estimators import HillEstimator, TailExponentLS
from rankattach.generator import ProcessParams, generate
from rankattach.stats import InsufficientDataError


@pytest.fixture(scope="module")
def degrees():
    return generate(ProcessParams(n=10**5, d=1, alpha=0.5, scheme="age", seed=3)).degrees


def test_params_and_clone():
    est = TailExponentLS(k_min=5, k_max=30, d=2)
    assert est.get_params() == {"k_min": 5, "k_max": 30, "d": 2, "min_count": 50}
    assert clone(est).set_params(k_max=40).k_max == 40
    assert HillEstimator().get_params()["k_threshold"] == 40


def test_ls_estimator_matches_function(degrees):
    est = TailExponentLS().fit(degrees)
    assert est.window_[0] == 4
    assert 1.8 < est.exponent_ < 2.4
    assert est.alpha_ == pytest.approx(1 / est.exponent_)
    assert est.predict(10) == pytest.approx(np.exp(est.intercept_) * 10**-est.exponent_)
    col = TailExponentLS().fit(degrees.reshape(-1, 1))
    assert col.exponent_ == est.exponent_


def test_ls_explicit_window(degrees):
    est = TailExponentLS(k_min=4, k_max=40).fit(degrees)
    assert est.window_ == (4, 40)


def test_hill_estimator(degrees):
    est = HillEstimator(k_threshold=20).fit(degrees)
    assert est.n_tail_ == int(np.sum(degrees >= 20))
    assert est.alpha_ == pytest.approx(1 / (est.exponent_ - 1))
    disc = HillEstimator(k_threshold=20, discrete=True).fit(degrees)
    assert disc.exponent_ < est.exponent_


def test_errors():
    with pytest.raises(NotFittedError):
        TailExponentLS().predict(3)
    with pytest.raises(ValueError):
        TailExponentLS().fit(np.ones((4, 2)))
    with pytest.raises(InsufficientDataError):
        HillEstimator().fit(np.arange(10))
