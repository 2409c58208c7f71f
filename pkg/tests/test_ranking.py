from __future__ import annotations

import itertools

import numpy as np
import pytest

from rankattach.ranking import (
    AgeRanking,
    DegreeRanking,
    ImplicitTreap,
    InverseAgeRanking,
    LabelRanking,
    RandomRanking,
    SchemeSpec,
    initial_random_rank,
    make_ranking,
)


def assert_bijection(state):
    ranks = state.ranks()
    assert sorted(ranks) == list(range(1, state.t + 1))
    for r in range(1, state.t + 1):
        assert state.rank_of(state.vertex_at(r)) == r


@pytest.mark.parametrize(
    "text, kind, s",
    [("age", "age", None), ("inverse-age", "inverse-age", None), ("label", "label", None), ("random:2.0", "random", 2.0), ("degree", "degree", None)],
)
def test_scheme_parse(text, kind, s):
    spec = SchemeSpec.parse(text)
    assert spec.kind == kind and spec.s == s
    assert SchemeSpec.parse(str(spec)) == spec


@pytest.mark.parametrize("bad", ["random", "random:0", "random:-1", "random:x", "pagerank", "age:2"])
def test_scheme_parse_rejects(bad):
    with pytest.raises(ValueError):
        SchemeSpec.parse(bad)


def test_initial_random_rank_examples():
    assert initial_random_rank(100, 0.25, 1.0) == 25
    assert initial_random_rank(100, 0.25, 2.0) == 50
    for s in (0.5, 1.0, 3.0):
        assert initial_random_rank(1, 0.7, s) == 1
    assert initial_random_rank(10, 0.0, 1.0) == 1


def test_initial_random_rank_law_exact_on_grid():
    # P(ceil(t U^{1/s}) <= k) = (k/t)^s, checked on a fine grid of U
    t, s, m = 20, 2.0, 200000
    u = (np.arange(m) + 0.5) / m
    r = np.array([initial_random_rank(t, x, s) for x in u])
    for k in range(1, t + 1):
        assert np.mean(r <= k) == pytest.approx((k / t) ** s, abs=2e-5)


def test_age_and_inverse_age_examples():
    age, inv = AgeRanking(), InverseAgeRanking()
    for _ in range(10):
        age.insert()
        inv.insert()
    assert age.vertex_at(3) == 3 and age.rank_of(7) == 7
    assert inv.vertex_at(1) == 10 and inv.rank_of(7) == 4
    assert_bijection(age)
    assert_bijection(inv)
    with pytest.raises(IndexError):
        age.vertex_at(11)
    with pytest.raises(KeyError):
        inv.rank_of(11)


def test_first_vertex_has_rank_one_under_every_scheme():
    for text in ("age", "inverse-age", "label", "random:1.5", "degree"):
        state = make_ranking(text, 4)
        assert state.insert(0.3, degree=2) == 1


def test_implicit_treap_matches_list():
    rng = np.random.default_rng(3)
    treap, ref = ImplicitTreap(500), []
    for v in range(1, 501):
        pos = int(rng.integers(1, len(ref) + 2))
        treap.insert(pos, v)
        ref.insert(pos - 1, v)
    assert [treap[i] for i in range(1, 501)] == ref
    assert all(treap.index(v) == ref.index(v) + 1 for v in range(1, 501))


def test_label_order_and_transform_invariance():
    rng = np.random.default_rng(11)
    labels = rng.random(300)
    a, b = LabelRanking(), LabelRanking()
    for x in labels:
        a.insert(x)
        b.insert(x**3)  # strictly increasing transform leaves the order alone
    assert a.ranks() == b.ranks()
    assert_bijection(a)
    order = np.argsort(labels, kind="stable") + 1
    assert [a.vertex_at(r) for r in range(1, 301)] == order.tolist()


def test_label_ties_break_by_age():
    state = LabelRanking()
    for x in (0.5, 0.5, 0.1):
        state.insert(x)
    assert [state.vertex_at(r) for r in (1, 2, 3)] == [3, 1, 2]


def test_random_ranking_shift_rule():
    rng = np.random.default_rng(5)
    state = RandomRanking(1.0, 400)
    prev = []
    for _ in range(400):
        r_new = state.insert(rng.random())
        now = state.ranks()
        assert now[-1] == r_new
        for old, cur in zip(prev, now):
            assert cur == (old + 1 if old >= r_new else old)
        prev = now
    assert_bijection(state)


def test_random_ranking_pinned_insert_and_capacity():
    state = RandomRanking(2.0, 2)
    state.insert_at(1)
    with pytest.raises(IndexError):
        state.insert_at(3)
    state.insert_at(1)
    assert state.ranks() == [2, 1]
    with pytest.raises(OverflowError):
        state.insert_at(1)


def test_degree_ranking_hand_example():
    # d=1: v_1 starts with its loop (degree 2); v_2 attaches to v_1
    state = DegreeRanking()
    state.insert(degree=0)
    state.notify_degree_increment(1)
    state.notify_degree_increment(1)
    assert state.count_at_most(1) == 0 and state.rank_of(1) == 1
    state.insert(degree=1)
    state.notify_degree_increment(1)
    assert state.vertex_at(1) == 1 and state.rank_of(2) == 2


def test_degree_ties_go_to_older_vertex():
    state = DegreeRanking()
    state.insert(degree=3)
    state.insert(degree=3)
    assert state.vertex_at(1) == 1
    state.notify_degree_increment(2)
    assert state.vertex_at(1) == 2


def lexicographic_ranks(degrees):
    order = sorted(range(len(degrees)), key=lambda i: (-degrees[i], i))
    ranks = [0] * len(degrees)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return ranks


def test_degree_order_under_random_increments():
    rng = np.random.default_rng(9)
    state, degrees = DegreeRanking(), []
    for step in range(300):
        state.insert(degree=1)
        degrees.append(1)
        for _ in range(2):
            v = int(rng.integers(1, state.t + 1))
            state.notify_degree_increment(v)
            degrees[v - 1] += 1
        if step % 25 == 0:
            assert state.ranks() == lexicographic_ranks(degrees)
            assert_bijection(state)
            # class k occupies ranks t - Y_{<=k} + 1 .. t - Y_{<=k-1}
            for k in set(degrees):
                members = [state.rank_of(v) for v in range(1, state.t + 1) if degrees[v - 1] == k]
                assert min(members) == state.t - state.count_at_most(k) + 1
                assert max(members) == state.t - state.count_at_most(k - 1)


def test_increment_never_worsens_rank_exhaustive():
    # every degree vector of three vertices with degrees 1..4, every vertex
    for degs in itertools.product(range(1, 5), repeat=3):
        for v in (1, 2, 3):
            state = DegreeRanking()
            for k in degs:
                state.insert(degree=k)
            before = state.rank_of(v)
            state.notify_degree_increment(v)
            assert state.rank_of(v) <= before
