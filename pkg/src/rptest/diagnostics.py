"""Mixing study on explicit benchmark graphs.

The three walks are restated for an arbitrary simple graph:

* TARGET proposes a uniformly random node and moves only if it is a
  neighbour, so its kernel is symmetric and its stationary law uniform;
* DEGREE is the simple random walk (stationary law proportional to degree);
* COUPLED runs one of each and exchanges them with probability
  ``min(1, deg(v') / deg(w'))``.

:func:`mixing_report` compares the target chain's empirical law with the
uniform law, with and without the coupling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ContractViolation, DomainError, IsolatedNodeError

DEFAULT_TOTALS = (100, 1_000, 10_000)


@dataclass(frozen=True)
class SimpleGraph:
    node_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.node_count < 1 or len(self.adjacency) != self.node_count:
            raise DomainError("adjacency must list neighbours for every node")
        for u, nb in enumerate(self.adjacency):
            if list(nb) != sorted(set(nb)):
                raise DomainError(f"neighbours of {u} must be sorted and distinct")
            for v in nb:
                if v == u:
                    raise DomainError(f"self-loop at node {u}")
                if not 0 <= v < self.node_count or u not in self.adjacency[v]:
                    raise DomainError(f"edge {u}-{v} is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges) -> "SimpleGraph":
        nb: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            nb[u].add(v)
            nb[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nb))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adjacency], dtype=np.int64)

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v}

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.zeros((self.node_count, self.node_count), dtype=np.bool_)
        for u, nb in enumerate(self.adjacency):
            a[u, list(nb)] = True
        indptr = np.concatenate([[0], np.cumsum(self.degrees)]).astype(np.int64)
        indices = np.array([v for nb in self.adjacency for v in nb], dtype=np.int64)
        for arr in (a, indptr, indices):
            arr.setflags(write=False)
        return a, indptr, indices

    def dense(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._arrays[0]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Read-only ``(indptr, indices)`` neighbour arrays."""
        return self._arrays[1], self._arrays[2]

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            for v in self.adjacency[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.node_count


def gen_circulant(n: int, jumps: Sequence[int]) -> SimpleGraph:
    """Node ``i`` joined to ``i +/- j (mod n)`` for every jump ``j``."""
    if not jumps:
        raise DomainError("at least one jump is required")
    if n < 2:
        raise DomainError("a circulant graph needs at least two nodes")
    edges = set()
    for j in jumps:
        if j <= 0 or j % n == 0:
            raise DomainError(f"jump {j} would create a self-loop on {n} nodes")
        for i in range(n):
            for k in ((i + j) % n, (i - j) % n):
                edges.add((min(i, k), max(i, k)))
    return SimpleGraph.from_edges(n, edges)


def gen_random_regular(n: int, k: int, rng: np.random.Generator, max_tries: int = 10_000) -> SimpleGraph:
    """Uniform ``k``-regular simple graph from the pairing model, restarting on collisions."""
    if n * k % 2 or not 0 <= k < n:
        raise DomainError(f"no simple {k}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), k)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(int(a), int(b)) for a, b in pairs}
        if len(edges) == len(pairs):
            return SimpleGraph.from_edges(n, edges)
    raise DomainError(f"pairing model failed {max_tries} times")


def gen_watts_strogatz(n: int, k: int, p: float, rng: np.random.Generator) -> SimpleGraph:
    """Ring lattice with ``k/2`` neighbours per side, each edge rewired with probability ``p``.

    Rewiring keeps the lower endpoint and draws a new partner uniformly,
    rejecting self-loops and duplicate edges.
    """
    if k % 2 or not 0 < k < n:
        raise DomainError("k must be even with 0 < k < n")
    if not 0 <= p <= 1:
        raise DomainError("rewiring probability must lie in [0, 1]")
    nb: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            nb[u].add(v)
            nb[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in nb[u] or rng.random() >= p:
                continue
            if len(nb[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(0, n))
                if w != u and w not in nb[u]:
                    break
            nb[u].discard(v)
            nb[v].discard(u)
            nb[u].add(w)
            nb[w].add(u)
    return SimpleGraph(n, tuple(tuple(sorted(s)) for s in nb))


class WalkKind(enum.Enum):
    TARGET = "target"
    DEGREE = "degree"
    COUPLED = "coupled"


def graph_chain_step(kind: WalkKind, graph: SimpleGraph, state, rng: np.random.Generator):
    """One step; ``state`` is a node, or a ``(v, w)`` pair for COUPLED."""
    indptr, indices = graph.csr()
    deg = graph.degrees
    if kind is WalkKind.TARGET:
        return int(_kernels.graph_target_step(graph.dense(), int(state), rng))
    if kind is WalkKind.DEGREE:
        if deg[state] == 0:
            raise IsolatedNodeError(f"node {state} has no neighbours")
        return int(_kernels.graph_degree_step(indptr, indices, int(state), rng))
    v, w = state
    if deg[w] == 0:
        raise IsolatedNodeError(f"node {w} has no neighbours")
    v = int(_kernels.graph_target_step(graph.dense(), int(v), rng))
    w = int(_kernels.graph_degree_step(indptr, indices, int(w), rng))
    if rng.random() * deg[w] <= deg[v]:
        v, w = w, v
    return v, w


def graph_transition_matrix(graph: SimpleGraph, kind: WalkKind) -> np.ndarray:
    n = graph.node_count
    adj = graph.dense().astype(float)
    deg = adj.sum(axis=1)
    if kind is WalkKind.TARGET:
        return adj / n + np.diag(1.0 - deg / n)
    if kind is WalkKind.DEGREE:
        if np.any(deg == 0):
            raise IsolatedNodeError("graph has isolated nodes")
        return adj / deg[:, None]
    raise ContractViolation("only TARGET and DEGREE have single-chain matrices")


def _check_dist(f, g) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise DomainError("distributions must have equal length")
    for h in (f, g):
        if abs(h.sum() - 1.0) > 1e-9 or np.any(h < 0):
            raise DomainError("arguments must be probability vectors")
    return f, g


def sup_distance(f, g) -> float:
    f, g = _check_dist(f, g)
    return float(np.max(np.abs(f - g)))


def tv_distance(f, g) -> float:
    f, g = _check_dist(f, g)
    return float(0.5 * np.sum(np.abs(f - g)))


@dataclass(frozen=True)
class TracePoint:
    mode: str
    seed: int
    retained: int
    d_sup: float
    d_tv: float


@dataclass
class DistanceTrace:
    points: list[TracePoint]

    def rows(self, mode: str | None = None, seed: int | None = None) -> list[TracePoint]:
        return [p for p in self.points if (mode is None or p.mode == mode) and (seed is None or p.seed == seed)]


def target_trace(
    graph: SimpleGraph,
    coupled: bool,
    burn_in: int,
    thin: int,
    count: int,
    rng: np.random.Generator,
    start: int = 0,
) -> np.ndarray:
    """Retained target-chain states of an independent or coupled pair."""
    if np.any(graph.degrees == 0):
        raise IsolatedNodeError("graph has isolated nodes")
    indptr, indices = graph.csr()
    return _kernels.run_graph_pair(graph.dense(), indptr, indices, coupled, start, start, burn_in, thin, count, rng)


def mixing_report(
    graph: SimpleGraph,
    burn_in: int = 5_000,
    thin: int = 100,
    totals: Sequence[int] = DEFAULT_TOTALS,
    seeds: Sequence[int] = (0,),
    start: int = 0,
) -> DistanceTrace:
    """Distances to uniform of the target chain's empirical law at each checkpoint.

    Checkpoints count retained samples (after burn-in and thinning).  Both
    modes use the same start node and step budget; each ``(mode, seed)``
    gets its own stream.
    """
    if any(int(t) < 0 for t in totals):
        raise DomainError("checkpoints must be nonnegative retained-sample counts")
    # an empty sample has no empirical law, so checkpoint 0 is skipped
    totals = sorted({int(t) for t in totals if int(t) > 0})
    if not totals:
        raise DomainError("no positive checkpoint to report")
    if not graph.is_connected():
        raise DomainError("mixing study needs a connected graph")
    n = graph.node_count
    uniform = np.full(n, 1.0 / n)
    points = []
    for seed in seeds:
        for code, mode in enumerate(("independent", "coupled")):
            rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(code,)))
            states = target_trace(graph, mode == "coupled", burn_in, thin, totals[-1], rng, start)
            for t in totals:
                emp = np.bincount(states[:t], minlength=n) / t
                points.append(TracePoint(mode, int(seed), t, sup_distance(emp, uniform), tv_distance(emp, uniform)))
    return DistanceTrace(points)
