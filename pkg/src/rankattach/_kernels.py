"""Compiled inner loops for :func:`rankattach.generator.generate`.

All arrays use zero-based vertex indices (``v_i`` is index ``i - 1``).
``targets`` arrives holding the sampled ranks for every substep and is
overwritten in place with the chosen endpoint indices.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def advance_age(targets, degrees, d, t0, t1):
    for t in range(t0, t1 + 1):
        for j in range(d):
            v = targets[t - 1, j] - 1
            targets[t - 1, j] = v
            degrees[v] += 1
        degrees[t - 1] += d


@numba.njit(cache=True)
def advance_inverse_age(targets, degrees, d, t0, t1):
    for t in range(t0, t1 + 1):
        for j in range(d):
            # rank r at time t-1 belongs to v_{t-r}
            v = t - 1 - targets[t - 1, j]
            targets[t - 1, j] = v
            degrees[v] += 1
        degrees[t - 1] += d


@numba.njit(cache=True)
def initial_random_ranks(u, s):
    """``ceil(t * u[t-1]**(1/s))`` clipped to ``[1, t]`` for every t."""
    n = u.shape[0]
    out = np.empty(n, dtype=np.int64)
    e = 1.0 / s
    for i in range(n):
        t = i + 1
        r = int(math.ceil(t * u[i] ** e))
        out[i] = min(max(r, 1), t)
    return out


# Fenwick tree over positions 1..n, stored in tree[1..n]


@numba.njit(cache=True)
def _bit_add(tree, i, delta):
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@numba.njit(cache=True)
def _bit_prefix(tree, i):
    s = 0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@numba.njit(cache=True)
def _bit_select(tree, k, top):
    """Smallest position whose prefix count reaches ``k``."""
    n = tree.shape[0] - 1
    pos = 0
    step = top
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] < k:
            pos = nxt
            k -= tree[nxt]
        step >>= 1
    return pos + 1


def top_bit(n):
    top = 1
    while top * 2 <= n:
        top *= 2
    return top


@numba.njit(cache=True)
def final_positions(initial_ranks):
    """Final slot (1-based) of each vertex when vertex t is inserted at rank initial_ranks[t-1].

    Walking backwards, vertex t occupies the initial_ranks[t-1]-th slot not
    already claimed by a later vertex; insertions never reorder existing
    vertices, so these slots give the relative order at every time.
    """
    n = initial_ranks.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        tree[i] += 1
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]
    top = 1
    while top * 2 <= n:
        top *= 2
    pos = np.empty(n, dtype=np.int64)
    for t in range(n, 0, -1):
        p = _bit_select(tree, initial_ranks[t - 1], top)
        pos[t - 1] = p
        _bit_add(tree, p, -1)
    return pos


@numba.njit(cache=True)
def advance_positional(targets, degrees, d, t0, t1, tree, pos, vertex_at_pos, top):
    """Label and random-rank schemes: rank = count of present vertices at or before a fixed slot."""
    for t in range(t0, t1 + 1):
        for j in range(d):
            p = _bit_select(tree, targets[t - 1, j], top)
            v = vertex_at_pos[p - 1]
            targets[t - 1, j] = v
            degrees[v] += 1
        degrees[t - 1] += d
        _bit_add(tree, pos[t - 1], 1)


@numba.njit(cache=True)
def positional_rank(tree, pos, v):
    return _bit_prefix(tree, pos[v])


# Treap keyed by (max_degree - degree) * n + index, so ascending key order
# is descending degree with ties broken by age. Node index == vertex index;
# links live in ``links`` with rows LEFT, RIGHT, PARENT, SIZE and -1 as null.
# Everything is iterative: numba recursion over many array arguments is slow.

LEFT, RIGHT, PARENT, SIZE = 0, 1, 2, 3


@numba.njit(cache=True, inline="always")
def _sz(links, x):
    return links[SIZE, x] if x >= 0 else 0


@numba.njit(cache=True)
def _rotate_up(links, root, x):
    """Rotate ``x`` above its parent; returns the (possibly new) root."""
    p = links[PARENT, x]
    g = links[PARENT, p]
    if links[LEFT, p] == x:
        c = links[RIGHT, x]
        links[LEFT, p] = c
        links[RIGHT, x] = p
    else:
        c = links[LEFT, x]
        links[RIGHT, p] = c
        links[LEFT, x] = p
    if c >= 0:
        links[PARENT, c] = p
    links[PARENT, p] = x
    links[PARENT, x] = g
    if g < 0:
        root = x
    elif links[LEFT, g] == p:
        links[LEFT, g] = x
    else:
        links[RIGHT, g] = x
    links[SIZE, p] = 1 + _sz(links, links[LEFT, p]) + _sz(links, links[RIGHT, p])
    links[SIZE, x] = 1 + _sz(links, links[LEFT, x]) + _sz(links, links[RIGHT, x])
    return root


@numba.njit(cache=True)
def treap_insert(key, prio, links, root, x):
    links[LEFT, x] = -1
    links[RIGHT, x] = -1
    links[SIZE, x] = 1
    if root < 0:
        links[PARENT, x] = -1
        return x
    k = key[x]
    y = root
    while True:
        links[SIZE, y] += 1
        if k < key[y]:
            if links[LEFT, y] < 0:
                links[LEFT, y] = x
                break
            y = links[LEFT, y]
        else:
            if links[RIGHT, y] < 0:
                links[RIGHT, y] = x
                break
            y = links[RIGHT, y]
    links[PARENT, x] = y
    while links[PARENT, x] >= 0 and prio[x] > prio[links[PARENT, x]]:
        root = _rotate_up(links, root, x)
    return root


@numba.njit(cache=True)
def treap_remove(prio, links, root, x):
    while links[LEFT, x] >= 0 and links[RIGHT, x] >= 0:
        a = links[LEFT, x]
        b = links[RIGHT, x]
        root = _rotate_up(links, root, a if prio[a] > prio[b] else b)
    c = links[LEFT, x] if links[LEFT, x] >= 0 else links[RIGHT, x]
    p = links[PARENT, x]
    if c >= 0:
        links[PARENT, c] = p
    if p < 0:
        return c
    if links[LEFT, p] == x:
        links[LEFT, p] = c
    else:
        links[RIGHT, p] = c
    while p >= 0:
        links[SIZE, p] -= 1
        p = links[PARENT, p]
    return root


@numba.njit(cache=True)
def treap_select(links, root, k):
    """Node holding the ``k``-th smallest key (one-based)."""
    x = root
    while True:
        ls = _sz(links, links[LEFT, x])
        if k <= ls:
            x = links[LEFT, x]
        elif k == ls + 1:
            return x
        else:
            k -= ls + 1
            x = links[RIGHT, x]


@numba.njit(cache=True)
def treap_position(links, x):
    """One-based position of node ``x`` in key order."""
    r = _sz(links, links[LEFT, x]) + 1
    while links[PARENT, x] >= 0:
        p = links[PARENT, x]
        if links[RIGHT, p] == x:
            r += _sz(links, links[LEFT, p]) + 1
        x = p
    return r


@numba.njit(cache=True)
def degree_key(n, kmax, degree, x):
    return (kmax - degree) * n + x


@numba.njit(cache=True)
def advance_degree(targets, degrees, d, t0, t1, key, prio, links, root, kmax):
    n = degrees.shape[0]
    for t in range(t0, t1 + 1):
        # every substep reads the ranking frozen at the end of step t-1
        for j in range(d):
            targets[t - 1, j] = treap_select(links, root, targets[t - 1, j])
        v_new = t - 1
        degrees[v_new] = d
        key[v_new] = degree_key(n, kmax, d, v_new)
        root = treap_insert(key, prio, links, root, v_new)
        for j in range(d):
            v = targets[t - 1, j]
            root = treap_remove(prio, links, root, v)
            degrees[v] += 1
            key[v] = degree_key(n, kmax, degrees[v], v)
            root = treap_insert(key, prio, links, root, v)
    return root
