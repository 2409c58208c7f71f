"""Ranking schemes: the bijection between the vertices of ``G_t`` and ``[t]``.

These classes are the step-by-step reference implementation. They are
readable and checked directly by the tests; :mod:`rankattach._kernels`
holds the compiled equivalents used by :func:`rankattach.generate`, and the
two are required to agree exactly on every run.

Vertices are identified by their birth time ``i`` (vertex ``v_i``), ranks are
one-based, and rank 1 is the highest.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from sortedcontainers import SortedList

AGE = "age"
INVERSE_AGE = "inverse-age"
LABEL = "label"
RANDOM = "random"
DEGREE = "degree"

KINDS = (AGE, INVERSE_AGE, LABEL, RANDOM, DEGREE)


@dataclass(frozen=True)
class SchemeSpec:
    """A ranking scheme; ``s`` is the exponent of ``F(x) = x**s`` for ``random``."""

    kind: str
    s: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ranking scheme {self.kind!r}; expected one of {KINDS}")
        if self.kind == RANDOM:
            if self.s is None or not (float(self.s) > 0.0) or math.isinf(float(self.s)):
                raise ValueError(f"random ranking needs a finite exponent s > 0, got {self.s!r}")
            object.__setattr__(self, "s", float(self.s))
        elif self.s is not None:
            raise ValueError(f"scheme {self.kind!r} takes no exponent")

    @classmethod
    def parse(cls, text: str) -> SchemeSpec:
        """Parse ``age | inverse-age | label | random:<s> | degree``."""
        text = text.strip().lower()
        if text.startswith(RANDOM + ":"):
            raw = text.split(":", 1)[1]
            try:
                s = float(raw)
            except ValueError:
                raise ValueError(f"bad exponent in scheme {text!r}") from None
            return cls(RANDOM, s)
        if text == RANDOM:
            raise ValueError("random ranking needs an exponent, e.g. 'random:1.0'")
        return cls(text)

    def __str__(self) -> str:
        if self.kind == RANDOM:
            return f"{RANDOM}:{self.s:g}"
        return self.kind


def initial_random_rank(t: int, u: float, s: float) -> int:
    """Inverse CDF of ``P(R_t <= k) = (k / t)**s``: ``ceil(t * u**(1/s))``."""
    r = math.ceil(t * math.pow(u, 1.0 / s))
    return min(max(r, 1), t)


class ImplicitTreap:
    """Sequence of the integers ``1..capacity`` supporting O(log n) positional ops.

    Each stored value doubles as its node index, so :meth:`index` walks parent
    links from the node instead of searching.
    """

    def __init__(self, capacity: int, seed: int = 0):
        size = capacity + 1
        rng = random.Random(seed)
        self._prio = [rng.random() for _ in range(size)]
        self._left = [0] * size
        self._right = [0] * size
        self._parent = [0] * size
        self._size = [0] * size
        self._root = 0  # 0 is the null node

    def __len__(self) -> int:
        return self._size[self._root]

    def _update(self, x: int) -> None:
        self._size[x] = 1 + self._size[self._left[x]] + self._size[self._right[x]]
        if self._left[x]:
            self._parent[self._left[x]] = x
        if self._right[x]:
            self._parent[self._right[x]] = x

    def _split(self, x: int, k: int) -> tuple[int, int]:
        # first k elements go left
        if not x:
            return 0, 0
        left_size = self._size[self._left[x]]
        if k <= left_size:
            a, b = self._split(self._left[x], k)
            self._left[x] = b
            self._update(x)
            self._parent[x] = 0
            if a:
                self._parent[a] = 0
            return a, x
        a, b = self._split(self._right[x], k - left_size - 1)
        self._right[x] = a
        self._update(x)
        self._parent[x] = 0
        if b:
            self._parent[b] = 0
        return x, b

    def _merge(self, a: int, b: int) -> int:
        if not a or not b:
            root = a or b
            if root:
                self._parent[root] = 0
            return root
        if self._prio[a] > self._prio[b]:
            self._right[a] = self._merge(self._right[a], b)
            self._update(a)
            self._parent[a] = 0
            return a
        self._left[b] = self._merge(a, self._left[b])
        self._update(b)
        self._parent[b] = 0
        return b

    def insert(self, position: int, value: int) -> None:
        """Insert ``value`` so that it ends up at one-based ``position``."""
        if not (1 <= position <= len(self) + 1):
            raise IndexError(f"position {position} out of range for length {len(self)}")
        self._left[value] = self._right[value] = 0
        self._size[value] = 1
        a, b = self._split(self._root, position - 1)
        self._root = self._merge(self._merge(a, value), b)

    def __getitem__(self, position: int) -> int:
        """Value at one-based ``position``."""
        if not (1 <= position <= len(self)):
            raise IndexError(f"position {position} out of range for length {len(self)}")
        x = self._root
        k = position
        while True:
            left_size = self._size[self._left[x]]
            if k <= left_size:
                x = self._left[x]
            elif k == left_size + 1:
                return x
            else:
                k -= left_size + 1
                x = self._right[x]

    def index(self, value: int) -> int:
        """One-based position of ``value``."""
        pos = self._size[self._left[value]] + 1
        x = value
        while x != self._root:
            p = self._parent[x]
            if self._right[p] == x:
                pos += self._size[self._left[p]] + 1
            x = p
        return pos


class _Fenwick:
    """Counts over ``1..size`` with prefix sums and lower-bound search; grows on demand."""

    def __init__(self, size: int = 16):
        self._n = size
        self._tree = [0] * (size + 1)
        self._raw = [0] * (size + 1)

    def _grow(self, need: int) -> None:
        n = self._n
        while n < need:
            n *= 2
        raw = self._raw + [0] * (n - self._n)
        self._n = n
        self._raw = raw
        self._tree = [0] * (n + 1)
        for i in range(1, n + 1):
            self._tree[i] += raw[i]
            j = i + (i & -i)
            if j <= n:
                self._tree[j] += self._tree[i]

    def add(self, i: int, delta: int) -> None:
        if i > self._n:
            self._grow(i)
        self._raw[i] += delta
        while i <= self._n:
            self._tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        i = min(i, self._n)
        s = 0
        while i > 0:
            s += self._tree[i]
            i -= i & -i
        return s

    def lower_bound(self, target: int) -> int:
        """Smallest ``i`` with ``prefix(i) >= target`` (``target >= 1``)."""
        pos = 0
        step = 1 << self._n.bit_length()
        while step:
            nxt = pos + step
            if nxt <= self._n and self._tree[nxt] < target:
                pos = nxt
                target -= self._tree[nxt]
            step >>= 1
        return pos + 1


class RankingState:
    """Base class; subclasses implement one scheme each.

    ``t`` is the number of vertices currently ranked.
    """

    scheme: SchemeSpec

    def __init__(self):
        self.t = 0

    def insert(self, u: float = 0.0, degree: int = 0) -> int:
        """Add ``v_{t+1}`` and return its initial rank.

        ``u`` is the scheme's randomness (ignored by deterministic schemes);
        ``degree`` is only used by degree ranking.
        """
        raise NotImplementedError

    def vertex_at(self, r: int) -> int:
        raise NotImplementedError

    def rank_of(self, v: int) -> int:
        raise NotImplementedError

    def notify_degree_increment(self, v: int) -> None:
        """Record that ``deg(v)`` grew by one; only degree ranking reacts."""

    def _check_rank(self, r: int) -> None:
        if not (1 <= r <= self.t):
            raise IndexError(f"rank {r} out of range [1, {self.t}]")

    def _check_vertex(self, v: int) -> None:
        if not (1 <= v <= self.t):
            raise KeyError(f"unknown vertex {v} at time {self.t}")

    def ranks(self) -> list[int]:
        """``ranks()[i - 1]`` is the current rank of ``v_i``; a full O(t log t) scan."""
        return [self.rank_of(v) for v in range(1, self.t + 1)]


class AgeRanking(RankingState):
    scheme = SchemeSpec(AGE)

    def insert(self, u=0.0, degree=0):
        self.t += 1
        return self.t

    def vertex_at(self, r):
        self._check_rank(r)
        return r

    def rank_of(self, v):
        self._check_vertex(v)
        return v


class InverseAgeRanking(RankingState):
    scheme = SchemeSpec(INVERSE_AGE)

    def insert(self, u=0.0, degree=0):
        self.t += 1
        return 1

    def vertex_at(self, r):
        self._check_rank(r)
        return self.t - r + 1

    def rank_of(self, v):
        self._check_vertex(v)
        return self.t - v + 1


class LabelRanking(RankingState):
    """Rank by a uniform label drawn at birth; equal labels fall back to age."""

    scheme = SchemeSpec(LABEL)

    def __init__(self):
        super().__init__()
        self.labels: list[float] = []
        self._order = SortedList()

    def insert(self, u=0.0, degree=0):
        self.t += 1
        label = float(u)
        self.labels.append(label)
        self._order.add((label, self.t))
        return self._order.index((label, self.t)) + 1

    def vertex_at(self, r):
        self._check_rank(r)
        return self._order[r - 1][1]

    def rank_of(self, v):
        self._check_vertex(v)
        return self._order.index((self.labels[v - 1], v)) + 1


class RandomRanking(RankingState):
    """New vertex lands at ``R_t`` with ``P(R_t <= k) = (k/t)**s``; others shift down."""

    def __init__(self, s: float, capacity: int):
        super().__init__()
        self.scheme = SchemeSpec(RANDOM, s)
        self.s = self.scheme.s
        self.capacity = capacity
        self._seq = ImplicitTreap(capacity)

    def insert(self, u=0.0, degree=0):
        return self.insert_at(initial_random_rank(self.t + 1, u, self.s))

    def insert_at(self, r: int) -> int:
        """Add ``v_{t+1}`` at a given initial rank instead of a random one."""
        if self.t >= self.capacity:
            raise OverflowError(f"capacity {self.capacity} exhausted")
        if not 1 <= r <= self.t + 1:
            raise IndexError(f"initial rank {r} out of range [1, {self.t + 1}]")
        self.t += 1
        self._seq.insert(r, self.t)
        return r

    def vertex_at(self, r):
        self._check_rank(r)
        return self._seq[r]

    def rank_of(self, v):
        self._check_vertex(v)
        return self._seq.index(v)


class DegreeRanking(RankingState):
    """Rank by degree (descending), ties broken by age.

    Vertices of degree ``k`` are kept in a per-class list ordered by birth;
    a Fenwick tree over degrees gives ``Y_{<=k}``, so the class of degree
    ``k`` occupies ranks ``t - Y_{<=k} + 1 .. t - Y_{<=k-1}``.
    """

    scheme = SchemeSpec(DEGREE)

    def __init__(self):
        super().__init__()
        self.degree: list[int] = []
        self._classes: dict[int, SortedList] = {}
        self._counts = _Fenwick()  # index k + 1 holds Y_k

    def count_at_most(self, k: int) -> int:
        """``Y_{<=k}(t)``: number of vertices of degree at most ``k``."""
        if k < 0:
            return 0
        return self._counts.prefix(k + 1)

    def _add(self, v: int, k: int) -> None:
        self._classes.setdefault(k, SortedList()).add(v)
        self._counts.add(k + 1, 1)

    def _remove(self, v: int, k: int) -> None:
        members = self._classes[k]
        members.remove(v)
        if not members:
            del self._classes[k]
        self._counts.add(k + 1, -1)

    def insert(self, u=0.0, degree=0):
        self.t += 1
        self.degree.append(int(degree))
        self._add(self.t, int(degree))
        return self.rank_of(self.t)

    def vertex_at(self, r):
        self._check_rank(r)
        # degree class k holds rank r iff Y_{<=k-1} < t - r + 1 <= Y_{<=k}
        k = self._counts.lower_bound(self.t - r + 1) - 1
        start = self.t - self.count_at_most(k) + 1
        return self._classes[k][r - start]

    def rank_of(self, v):
        self._check_vertex(v)
        k = self.degree[v - 1]
        start = self.t - self.count_at_most(k) + 1
        return start + self._classes[k].index(v)

    def notify_degree_increment(self, v):
        self._check_vertex(v)
        k = self.degree[v - 1]
        self._remove(v, k)
        self.degree[v - 1] = k + 1
        self._add(v, k + 1)


def make_ranking(scheme: SchemeSpec | str, capacity: int) -> RankingState:
    """Empty ranking for ``scheme`` able to hold ``capacity`` vertices."""
    if isinstance(scheme, str):
        scheme = SchemeSpec.parse(scheme)
    if scheme.kind == AGE:
        return AgeRanking()
    if scheme.kind == INVERSE_AGE:
        return InverseAgeRanking()
    if scheme.kind == LABEL:
        return LabelRanking()
    if scheme.kind == RANDOM:
        return RandomRanking(scheme.s, capacity)
    return DegreeRanking()
