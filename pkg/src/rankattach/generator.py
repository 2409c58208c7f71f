"""Grow ``G_1 -> G_n`` under rank-based attachment.

Randomness is drawn up front from a counter-based Philox stream:

* ``scheme_u = rng.random(n)``: one uniform per vertex (label, or the
  inverse-CDF draw for a random initial rank; unused by the other schemes);
* ``edge_u = rng.random((n, d))``: one uniform per substep, row ``t - 1``
  for step ``t`` (row 0 is unused because ``G_1`` is fixed).

The stream for run ``k`` of seed ``seed`` is
``Philox(SeedSequence(seed, spawn_key=(k,)))``; a single :func:`generate`
call is run 0. Because rank weights do not depend on the ranking, the rank
picked in every substep is fixed by ``edge_u`` alone and can be sampled in
one vectorised pass; the scheme only decides which vertex holds that rank.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from ._validation import check_alpha, check_positive_int
from .ranking import AGE, DEGREE, INVERSE_AGE, LABEL, RANDOM, SchemeSpec, make_ranking
from .weights import WeightTable, build_weight_table, sample_ranks

log = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_RATIO = 0.1


@dataclass(frozen=True)
class ProcessParams:
    """Configuration of one run.

    ``pinned`` overrides the scheme's random value for chosen vertices: the
    label for ``label`` ranking, the initial rank ``R_i`` for ``random``
    ranking. It exists to condition experiments on a particular vertex.
    """

    n: int
    d: int = 1
    alpha: float = 0.5
    scheme: SchemeSpec = field(default_factory=lambda: SchemeSpec(AGE))
    seed: int = 0
    track: tuple[int, ...] = ()
    snapshot_times: tuple[int, ...] = ()
    keep_edges: bool = False
    checkpoint_ratio: float = DEFAULT_CHECKPOINT_RATIO
    pinned: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", SchemeSpec.parse(self.scheme))
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        object.__setattr__(self, "d", check_positive_int(self.d, "d"))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        seed = int(self.seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        object.__setattr__(self, "seed", seed)
        track = tuple(sorted({int(v) for v in self.track}))
        if track and (track[0] < 1 or track[-1] > self.n):
            raise ValueError(f"tracked vertices must lie in [1, {self.n}]")
        object.__setattr__(self, "track", track)
        snaps = tuple(sorted({int(t) for t in self.snapshot_times}))
        if snaps and (snaps[0] < 1 or snaps[-1] > self.n):
            raise ValueError(f"snapshot times must lie in [1, {self.n}]")
        object.__setattr__(self, "snapshot_times", snaps)
        if not self.checkpoint_ratio > 0:
            raise ValueError("checkpoint_ratio must be positive")
        if 2 * self.d * self.n >= 2**62:
            raise OverflowError("n * d too large for 64-bit endpoint counters")
        pinned = {int(v): float(x) for v, x in dict(self.pinned).items()}
        if pinned:
            if self.scheme.kind not in (LABEL, RANDOM):
                raise ValueError("pinned values only apply to label and random ranking")
            for v, x in pinned.items():
                if not 1 <= v <= self.n:
                    raise ValueError(f"pinned vertex {v} outside [1, {self.n}]")
                if self.scheme.kind == LABEL and not 0.0 <= x < 1.0:
                    raise ValueError(f"pinned label {x} outside [0, 1)")
                if self.scheme.kind == RANDOM and not (x == int(x) and 1 <= x <= v):
                    raise ValueError(f"pinned initial rank of v_{v} must be an integer in [1, {v}]")
        object.__setattr__(self, "pinned", pinned)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "alpha": self.alpha,
            "scheme": str(self.scheme),
            "seed": self.seed,
            "track": list(self.track),
            "snapshot_times": list(self.snapshot_times),
            "keep_edges": self.keep_edges,
            "checkpoint_ratio": self.checkpoint_ratio,
            "pinned": {str(k): v for k, v in sorted(self.pinned.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> ProcessParams:
        data = dict(data)
        data["track"] = tuple(data.get("track", ()))
        data["snapshot_times"] = tuple(data.get("snapshot_times", ()))
        data["pinned"] = {int(k): v for k, v in data.get("pinned", {}).items()}
        return cls(**data)


@dataclass
class ProcessResult:
    """Outputs of one run.

    ``degrees[i - 1]`` is ``deg(v_i, n)`` counting a loop twice.
    ``snapshots`` holds ``(t, {k: Y_k(t)})`` pairs, ``trajectories[i]`` an
    integer array of ``(t, rank, degree)`` rows, and ``edges`` (when kept)
    the ``(new, old)`` endpoint pairs in creation order, loops of ``G_1``
    first.
    """

    params: ProcessParams
    degrees: np.ndarray
    snapshots: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)
    edges: np.ndarray | None = None
    rng_draws: int = 0


def make_rng(seed: int, run: int = 0) -> np.random.Generator:
    """Independent Philox stream for run ``run`` of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(run,))))


def checkpoint_times(birth: int, n: int, ratio: float = DEFAULT_CHECKPOINT_RATIO) -> list[int]:
    """Times ``ceil(birth * (1 + ratio)**m)`` up to ``n``, plus ``n`` itself."""
    times = []
    m = 0
    while True:
        t = math.ceil(birth * (1.0 + ratio) ** m)
        if t > n:
            break
        if not times or t != times[-1]:
            times.append(t)
        m += 1
    if times[-1] != n:
        times.append(n)
    return times


def _draw(params: ProcessParams, run: int):
    rng = make_rng(params.seed, run)
    scheme_u = rng.random(params.n)
    edge_u = rng.random((params.n, params.d))
    return scheme_u, edge_u, params.n + params.n * params.d


def _sample_all_ranks(table: WeightTable, edge_u: np.ndarray) -> np.ndarray:
    n, d = edge_u.shape
    ranks = np.zeros((n, d), dtype=np.int64)
    if n > 1:
        prev = np.arange(1, n, dtype=np.int64)[:, None]  # t - 1 for t = 2..n
        ranks[1:] = sample_ranks(table, prev, edge_u[1:])
    return ranks


def _scheme_values(params: ProcessParams, scheme_u: np.ndarray):
    """Per-vertex labels, or initial ranks ``R_t`` for random ranking."""
    kind = params.scheme.kind
    if kind == LABEL:
        labels = scheme_u.copy()
        for v, x in params.pinned.items():
            labels[v - 1] = x
        return labels
    if kind == RANDOM:
        r = K.initial_random_ranks(scheme_u, params.scheme.s)
        for v, x in params.pinned.items():
            r[v - 1] = int(x)
        return r
    return None


class _Engine:
    """Owns the per-run state of the compiled path and answers rank queries."""

    def __init__(self, params: ProcessParams, targets: np.ndarray, values):
        self.params = params
        self.kind = params.scheme.kind
        n, d = params.n, params.d
        self.targets = targets
        self.degrees = np.zeros(n, dtype=np.int64)
        self.degrees[0] = 2 * d
        self.t = 1
        if self.kind in (LABEL, RANDOM):
            if self.kind == LABEL:
                order = np.lexsort((np.arange(n), values))  # by label, then birth
                pos = np.empty(n, dtype=np.int64)
                pos[order] = np.arange(1, n + 1)
            else:
                pos = K.final_positions(values)
            self.pos = pos
            self.vertex_at_pos = np.empty(n, dtype=np.int64)
            self.vertex_at_pos[pos - 1] = np.arange(n)
            self.tree = np.zeros(n + 1, dtype=np.int64)
            self.top = K.top_bit(n)
            K._bit_add(self.tree, pos[0], 1)
        elif self.kind == DEGREE:
            kmax = 2 * d * n + 1
            if kmax * n >= 2**63:
                raise OverflowError("n too large for the degree-ranking key space")
            self.kmax = kmax
            # priorities only shape the tree, never the ranking, so a fixed stream is fine
            self.prio = np.random.default_rng(0).random(n)
            self.key = np.zeros(n, dtype=np.int64)
            self.links = np.full((4, n), -1, dtype=np.int64)
            self.key[0] = K.degree_key(n, kmax, 2 * d, 0)
            self.root = K.treap_insert(self.key, self.prio, self.links, -1, 0)

    def advance(self, t1: int) -> None:
        t0 = self.t + 1
        if t1 < t0:
            return
        d = self.params.d
        if self.kind == AGE:
            K.advance_age(self.targets, self.degrees, d, t0, t1)
        elif self.kind == INVERSE_AGE:
            K.advance_inverse_age(self.targets, self.degrees, d, t0, t1)
        elif self.kind in (LABEL, RANDOM):
            K.advance_positional(
                self.targets, self.degrees, d, t0, t1, self.tree, self.pos, self.vertex_at_pos, self.top
            )
        else:
            self.root = K.advance_degree(
                self.targets, self.degrees, d, t0, t1, self.key, self.prio, self.links, self.root, self.kmax
            )
        self.t = t1

    def rank_of(self, v: int) -> int:
        if self.kind == AGE:
            return v
        if self.kind == INVERSE_AGE:
            return self.t - v + 1
        if self.kind in (LABEL, RANDOM):
            return int(K.positional_rank(self.tree, self.pos, v - 1))
        return int(K.treap_position(self.links, v - 1))

    def degree_of(self, v: int) -> int:
        return int(self.degrees[v - 1])


class _ReferenceEngine:
    """Step-by-step path through :mod:`rankattach.ranking`; slow, used to cross-check."""

    def __init__(self, params: ProcessParams, targets: np.ndarray, scheme_u: np.ndarray):
        self.params = params
        self.targets = targets
        self.scheme_u = scheme_u
        self.state = make_ranking(params.scheme, params.n)
        self.degrees = np.zeros(params.n, dtype=np.int64)
        self.degrees[0] = 2 * params.d
        self._insert(1, 0)
        for _ in range(2 * params.d):
            self.state.notify_degree_increment(1)
        self.t = 1

    def _insert(self, t: int, degree: int) -> None:
        kind = self.params.scheme.kind
        pinned = self.params.pinned.get(t)
        if kind == RANDOM and pinned is not None:
            self.state.insert_at(int(pinned))
        elif kind == LABEL and pinned is not None:
            self.state.insert(pinned)
        else:
            self.state.insert(float(self.scheme_u[t - 1]), degree=degree)

    def advance(self, t1: int) -> None:
        d = self.params.d
        for t in range(self.t + 1, t1 + 1):
            chosen = [self.state.vertex_at(int(r)) for r in self.targets[t - 1]]
            self._insert(t, d)
            self.degrees[t - 1] += d
            for j, v in enumerate(chosen):
                self.targets[t - 1, j] = v - 1
                self.degrees[v - 1] += 1
                self.state.notify_degree_increment(v)
        self.t = max(self.t, t1)

    def rank_of(self, v: int) -> int:
        return self.state.rank_of(v)

    def degree_of(self, v: int) -> int:
        return int(self.degrees[v - 1])


def _histogram(degrees: np.ndarray) -> dict[int, int]:
    counts = np.bincount(degrees)
    nz = np.flatnonzero(counts)
    return {int(k): int(counts[k]) for k in nz}


def generate(
    params: ProcessParams,
    table: WeightTable | None = None,
    *,
    run: int = 0,
    engine: str = "fast",
) -> ProcessResult:
    """Run the process once.

    ``engine="reference"`` drives the pure-Python ranking classes instead of
    the compiled kernels; both consume the same random stream and must give
    identical results.
    """
    if table is None:
        table = build_weight_table(params.alpha, params.n)
    elif table.t_max < params.n:
        raise ValueError(f"weight table covers t <= {table.t_max} but n = {params.n}")
    elif table.alpha != params.alpha:
        raise ValueError(f"weight table built for alpha={table.alpha}, params say {params.alpha}")

    scheme_u, edge_u, draws = _draw(params, run)
    targets = _sample_all_ranks(table, edge_u)
    del edge_u
    values = _scheme_values(params, scheme_u)
    if engine == "fast":
        eng = _Engine(params, targets, values)
    elif engine == "reference":
        eng = _ReferenceEngine(params, targets, scheme_u)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    schedules = {v: checkpoint_times(v, params.n, params.checkpoint_ratio) for v in params.track}
    events: dict[int, list[int]] = {}
    for v, times in schedules.items():
        for t in times:
            events.setdefault(t, []).append(v)
    snap_set = set(params.snapshot_times)
    trajectories: dict[int, list] = {v: [] for v in params.track}
    snapshots = []
    for t in sorted(set(events) | snap_set):
        eng.advance(t)
        for v in events.get(t, ()):
            trajectories[v].append((t, eng.rank_of(v), eng.degree_of(v)))
        if t in snap_set:
            snapshots.append((t, _histogram(eng.degrees[:t])))
    eng.advance(params.n)

    edges = None
    if params.keep_edges:
        d = params.d
        edges = np.empty((params.n * d, 2), dtype=np.int64)
        edges[:d] = 1
        edges[d:, 0] = np.repeat(np.arange(2, params.n + 1), d)
        edges[d:, 1] = eng.targets[1:].ravel() + 1
    log.debug("generated n=%d d=%d scheme=%s run=%d", params.n, params.d, params.scheme, run)
    return ProcessResult(
        params=params,
        degrees=eng.degrees,
        snapshots=snapshots,
        trajectories={v: np.asarray(rows, dtype=np.int64).reshape(-1, 3) for v, rows in trajectories.items()},
        edges=edges,
        rng_draws=draws,
    )


def _run_one(args):
    params, table, k = args
    return generate(params, table, run=k)


def run_ensemble(params: ProcessParams, runs: int, *, workers: int = 1, table: WeightTable | None = None) -> list[ProcessResult]:
    """``runs`` independent runs; run ``k`` uses stream ``(params.seed, k)``.

    Results are ordered by run index whatever ``workers`` is.
    """
    runs = check_positive_int(runs, "runs")
    if table is None:
        table = build_weight_table(params.alpha, params.n)
    jobs = [(params, table, k) for k in range(runs)]
    if workers <= 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def with_seed(params: ProcessParams, seed: int) -> ProcessParams:
    return replace(params, seed=seed)
