from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from rankattach.generator import ProcessParams, run_ensemble
from rankattach.theory import (
    ConvergenceError,
    TheoryPrediction,
    alpha_from_exponent,
    c_alpha,
    degree_fraction,
    degree_fraction_asymptotic,
    exact_expected_degree,
    expected_degree_age,
    expected_degree_high_s,
    expected_degree_inverse_age_bounds,
    expected_degree_label,
    integrate_degree_ode,
    low_s_drift_constant,
    r_star,
    rank_trajectory_high_s,
    rank_trajectory_low_s,
    solve_Ck,
    tail_age,
    tail_label,
    tail_predictions,
)
from rankattach.weights import build_weight_table


def test_ck_base_and_closed_form():
    t = solve_Ck(0.5, 10)
    assert t.C[0] == 1.0
    assert abs(t.C[1] - (3 - math.sqrt(5)) / 2) < 1e-15
    assert t.c[1] == pytest.approx(0.6180340, abs=1e-7)
    assert math.isnan(t.c[0])


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_ck_against_high_precision_roots(alpha):
    table = solve_Ck(alpha, 30)
    a = mpmath.mpf(1) - mpmath.mpf(alpha)
    with mpmath.workdps(40):
        prev = mpmath.mpf(1)
        for k in range(1, 31):
            prev = mpmath.findroot(lambda x: x + x**a - prev**a, (mpmath.mpf(0), prev), solver="anderson")
            assert abs(float(prev) - table.C[k]) <= 1e-14 * max(1.0, float(prev)) + 1e-300


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_ck_invariants(alpha):
    table = solve_Ck(alpha, 10**5)
    C, a = table.C, 1 - alpha
    assert np.all(np.diff(C) < 0) and C[-1] > 0
    resid = C[1:] + C[1:] ** a - C[:-1] ** a
    assert np.max(np.abs(resid)) < 1e-12
    assert np.sum(table.c[1:]) == pytest.approx(1 - C[-1], abs=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_B_converges_to_c_alpha(alpha):
    table = solve_Ck(alpha, 10**4)
    assert abs(table.B[-1] - table.c_alpha) / table.c_alpha < 0.02
    # eventually monotone: no sign change in the last stretch
    steps = np.sign(np.diff(table.B[5000:]))
    assert np.all(steps == steps[0])


def test_c_alpha_and_fractions():
    assert c_alpha(0.5) == 1.0
    table = solve_Ck(0.5, 20)
    assert degree_fraction(table, 1) == pytest.approx(1 - table.C[1])
    assert degree_fraction_asymptotic(0.5, 10) == pytest.approx(0.002)
    with pytest.raises(ValueError):
        degree_fraction(table, 21)
    with pytest.raises(ValueError):
        degree_fraction(table, 0)


def test_ode_matches_recurrence_and_is_linear():
    z = integrate_degree_ode(0.5, 5, xs=(0.5, 1.0))
    c = solve_Ck(0.5, 5).c
    assert np.max(np.abs(z[1] - c[1:])) < 1e-3
    assert np.allclose(z[1] / z[0], 2.0, atol=1e-3)
    assert integrate_degree_ode(0.5, 1)[0, 0] == pytest.approx(0.618034, abs=1e-3)


@pytest.mark.parametrize("alpha", [0.2, 0.8])
def test_ode_other_alphas(alpha):
    z = integrate_degree_ode(alpha, 4, h=1e-4)[0]
    assert np.max(np.abs(z - solve_Ck(alpha, 4).c[1:])) < 1e-3


def test_ode_blowup_guard(monkeypatch):
    # valid inputs never leave the domain (the clamped RK4 is stable even for
    # huge steps), so drive the kernel with a negative exponent to trip it
    from rankattach import theory

    _, bad, _ = theory._rk4_degree(-3.0, 3, 1e-3, 0.1, np.array([1.0]))
    assert bad
    integrate_degree_ode(0.5, 3, x0=1e-3, h=0.9)
    monkeypatch.setattr(theory, "_rk4_degree", lambda *a: (None, True, 0.5))
    with pytest.raises(ConvergenceError):
        integrate_degree_ode(0.5, 3)


def test_ode_argument_checks():
    with pytest.raises(ValueError):
        integrate_degree_ode(0.5, 3, x0=0.0)
    with pytest.raises(ValueError):
        integrate_degree_ode(0.5, 3, xs=(1.0, 0.5))


def test_expected_degree_age_examples():
    assert expected_degree_age(7, 7, 3, 0.3) == pytest.approx(3.0, abs=1e-12)
    assert expected_degree_age(25, 100, 1, 0.5) == pytest.approx(2.0)
    assert expected_degree_age(1, 16, 2, 0.75) == pytest.approx(20 / 3)


def test_tail_examples_and_shape():
    assert tail_age(1, 1234, 1, 0.5) == pytest.approx(1234)
    assert tail_age(10, 10**6, 1, 0.5) == pytest.approx(10**4)
    assert tail_label(100, 10**6, 1, 0.5) == pytest.approx(50)
    assert math.gamma(3) == 2 == math.factorial(2)
    ks = np.arange(1, 200)
    for f in (tail_age, tail_label):
        v = f(ks, 10**5, 2, 0.6)
        assert np.all(np.diff(v) < 0)
        assert np.allclose(f(3 * ks, 10**5, 2, 0.6), v * 3 ** (-1 / 0.6))


def test_inverse_age_bounds():
    lo, hi = expected_degree_inverse_age_bounds(1, 10**4 + 1, 1, 0.5)
    assert lo == pytest.approx(1 + 0.25 * math.log(10**4))
    assert hi == pytest.approx(1 + 0.5 * math.log(10**4))
    assert expected_degree_inverse_age_bounds(9, 9, 2, 0.5) == (2.0, 2.0)
    with pytest.raises(ValueError):
        expected_degree_inverse_age_bounds(10, 9, 1, 0.5)


def test_label_expected_degree():
    assert expected_degree_label(50, 50, 2, 0.4, 0.3) == pytest.approx(2.0)
    assert expected_degree_label(1, math.e, 1, 0.5, 0.25) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        expected_degree_label(1, 10, 1, 0.5, 1.0)


def test_r_star_and_high_s_trajectory():
    assert r_star(10, 99, 2.0) == pytest.approx(1 / 0.09)
    assert r_star(10, 10**12, 3.0) == pytest.approx(10, rel=1e-6)
    assert rank_trajectory_high_s(100, 99, 2.0) == pytest.approx(50)
    assert rank_trajectory_high_s(100, 9899, 2.0) == pytest.approx(99.0, abs=0.01)
    t = np.geomspace(1, 1e9, 50)
    v = rank_trajectory_high_s(100, t, 2.5)
    assert np.all(np.diff(v) > 0) and np.all(v < 100)
    with pytest.raises(ValueError):
        r_star(10, 99, 1.0)
    with pytest.raises(ValueError):
        r_star(100, 99, 2.0)


def test_expected_degree_high_s_inverts_tail():
    n, d, alpha, k = 10**6, 2, 0.6, 17.0
    R = n * ((1 - alpha) / alpha * d / k) ** (1 / alpha)
    assert expected_degree_high_s(R, n, d, alpha) == pytest.approx(k)
    assert expected_degree_high_s(10**4, 10**6, 1, 0.5) == pytest.approx(10)


def test_low_s_trajectory():
    assert low_s_drift_constant(1, 3, 0.5) == pytest.approx(1.0)
    assert rank_trajectory_low_s(1, 3, 10**4, 0.5) == pytest.approx(9800)
    assert rank_trajectory_low_s(999, 999, 999, 0.5) == pytest.approx(999, rel=2e-3)
    t = np.array([1e6, 1e9, 1e12])
    assert np.all(np.diff(rank_trajectory_low_s(5, 10, t, 0.5) / t) > 0)
    with pytest.raises(ValueError):
        low_s_drift_constant(1, 3, 1.0)


def test_alpha_from_exponent():
    assert alpha_from_exponent(3.0) == 0.5
    assert alpha_from_exponent(2.1) == pytest.approx(0.909, abs=1e-3)
    assert alpha_from_exponent(2.7) == pytest.approx(0.588, abs=1e-3)
    assert alpha_from_exponent(1.5) == 2.0
    assert 0 < alpha_from_exponent(1.5, clip=True) < 1
    with pytest.raises(ValueError):
        alpha_from_exponent(1.0)


def test_exact_expected_degree_against_loop():
    alpha, n, d = 0.5, 200, 2
    table = build_weight_table(alpha, n)
    g = lambda t: sum(j**-alpha for j in range(1, t + 1))
    i = 17
    age = d + d * sum(i**-alpha / g(t - 1) for t in range(i + 1, n + 1))
    inv = d + d * sum((t - i) ** -alpha / g(t - 1) for t in range(i + 1, n + 1))
    assert exact_expected_degree(table, "age", i, n, d) == pytest.approx(age, rel=1e-12)
    assert exact_expected_degree(table, "inverse-age", i, n, d) == pytest.approx(inv, rel=1e-12)
    assert exact_expected_degree(table, "age", 1, 1, d) == 2 * d
    with pytest.raises(ValueError):
        exact_expected_degree(table, "label", 3, n, d)


def test_exact_expected_degree_matches_simulation():
    n, runs = 2000, 300
    table = build_weight_table(0.5, n)
    for scheme, i in (("age", 20), ("inverse-age", 1)):
        sims = run_ensemble(ProcessParams(n=n, d=1, alpha=0.5, scheme=scheme, seed=13), runs, table=table)
        x = np.array([r.degrees[i - 1] for r in sims], dtype=float)
        assert abs(x.mean() - exact_expected_degree(table, scheme, i, n, 1)) < 4 * x.std() / math.sqrt(runs)


def test_predictions():
    preds = tail_predictions("random:2", [5, 6], 1000, 1, 0.5)
    assert [p.key for p in preds] == [("tail_count", 5), ("tail_count", 6)]
    assert preds[0].value == pytest.approx(tail_age(5, 1000, 1, 0.5))
    assert tail_predictions("random:1", [5], 1000, 1, 0.5)[0].value == pytest.approx(tail_label(5, 1000, 1, 0.5))
    with pytest.raises(ValueError):
        tail_predictions("degree", [5], 1000, 1, 0.5)
    with pytest.raises(ValueError):
        TheoryPrediction("age", "mystery", 1, 1.0)
    with pytest.raises(ValueError):
        TheoryPrediction("age", "tail_count", 1, float("inf"))
