"""The restricted permutation space and its transposition graph.

A :class:`RestrictedSpace` is the set of permutations ``r`` of ``1..n``
with ``lo[i] <= r[i] <= hi[i]``.  Two members are adjacent when they
differ by a single transposition.  The graph is never materialised
except by :func:`enumerate_space` for small ``n``.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .censoring import RankBounds
from .errors import CapacityError, ContractViolation, InfeasibleBoundsError, InvalidDatasetError


@dataclass(frozen=True, eq=False)
class RestrictedSpace:
    """Per-coordinate rank bounds; nonempty by construction.

    Build with :meth:`from_bounds`, which certifies nonemptiness by
    finding a member (kept as :attr:`start`).
    """

    lo: np.ndarray
    hi: np.ndarray
    start: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.lo.shape[0])

    @property
    def bounds(self) -> list[RankBounds]:
        return [RankBounds(int(a), int(b)) for a, b in zip(self.lo, self.hi)]

    @classmethod
    def from_bounds(cls, bounds: Iterable[Sequence[int]]) -> "RestrictedSpace":
        pairs = [tuple(int(v) for v in b) for b in bounds]
        if not pairs:
            raise InvalidDatasetError("a restricted space needs at least one coordinate")
        n = len(pairs)
        lo = np.array([p[0] for p in pairs], dtype=np.int64)
        hi = np.array([p[1] for p in pairs], dtype=np.int64)
        bad = np.flatnonzero((lo < 1) | (hi > n) | (lo > hi))
        if bad.size:
            i = int(bad[0])
            raise InvalidDatasetError(f"bound {i} = [{lo[i]}, {hi[i]}] is outside 1 <= lo <= hi <= {n}")
        start = _greedy_member(lo, hi)
        for a in (lo, hi, start):
            a.setflags(write=False)
        return cls(lo, hi, start)

    def __len__(self) -> int:
        return self.n


def as_rank_vector(r: Sequence[int], n: int | None = None) -> np.ndarray:
    arr = np.asarray(r, dtype=np.int64)
    if arr.ndim != 1:
        raise ContractViolation("a rank vector must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ContractViolation(f"rank vector has length {arr.shape[0]}, expected {n}")
    return arr


def is_permutation(r: np.ndarray) -> bool:
    n = r.shape[0]
    return bool(np.array_equal(np.sort(r), np.arange(1, n + 1)))


def contains(space: RestrictedSpace, r: Sequence[int]) -> bool:
    r = as_rank_vector(r, space.n)
    return is_permutation(r) and bool(np.all((space.lo <= r) & (r <= space.hi)))


def _greedy_member(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # assign ranks in increasing order to the open observation whose upper bound expires first
    n = lo.shape[0]
    by_lo = sorted(range(n), key=lambda i: (lo[i], i))
    heap: list[tuple[int, int]] = []
    out = np.zeros(n, dtype=np.int64)
    nxt = 0
    for rank in range(1, n + 1):
        while nxt < n and lo[by_lo[nxt]] <= rank:
            i = by_lo[nxt]
            heapq.heappush(heap, (int(hi[i]), i))
            nxt += 1
        if not heap or heap[0][0] < rank:
            raise InfeasibleBoundsError(rank)
        _, i = heapq.heappop(heap)
        out[i] = rank
    return out


def initial_permutation(space: RestrictedSpace) -> np.ndarray:
    """Deterministic member of ``space`` (smallest index wins ties)."""
    return _greedy_member(space.lo, space.hi)


def swap_feasible(space: RestrictedSpace, r: Sequence[int], c: int, d: int) -> bool:
    """Whether transposing 0-based coordinates ``c`` and ``d`` stays inside ``space``."""
    if c == d:
        raise ContractViolation("swap needs two distinct coordinates")
    r = as_rank_vector(r, space.n)
    return bool(_kernels.pair_ok(space.lo, space.hi, r, c, d))


def feasible_pairs(space: RestrictedSpace, r: Sequence[int]) -> np.ndarray:
    """Boolean ``n x n`` matrix of feasible transpositions (upper triangle only)."""
    r = as_rank_vector(r, space.n)
    lo, hi = space.lo, space.hi
    # entry (c, d): r[d] fits coordinate c and r[c] fits coordinate d
    fits = (lo[:, None] <= r[None, :]) & (r[None, :] <= hi[:, None])
    return np.triu(fits & fits.T, k=1)


def degree(space: RestrictedSpace, r: Sequence[int]) -> int:
    if not contains(space, r):
        raise ContractViolation(f"{list(r)} is not a member of the space")
    return int(feasible_pairs(space, r).sum())


def enumerate_space(space: RestrictedSpace, limit: int = 50_000) -> list[tuple[int, ...]]:
    """All members in lexicographic order; raises :class:`CapacityError` past ``limit``."""
    n = space.n
    lo = space.lo.tolist()
    hi = space.hi.tolist()
    out: list[tuple[int, ...]] = []
    used = [False] * (n + 2)
    cur = [0] * n

    def rec(i: int) -> None:
        if i == n:
            if len(out) >= limit:
                raise CapacityError(f"restricted space has more than {limit} members")
            out.append(tuple(cur))
            return
        for v in range(lo[i], hi[i] + 1):
            if not used[v]:
                used[v] = True
                cur[i] = v
                rec(i + 1)
                used[v] = False

    rec(0)
    return out


def neighbours(space: RestrictedSpace, r: Sequence[int]) -> list[tuple[int, ...]]:
    r = as_rank_vector(r, space.n)
    out = []
    for c, d in zip(*np.nonzero(feasible_pairs(space, r))):
        s = r.copy()
        s[c], s[d] = s[d], s[c]
        out.append(tuple(int(v) for v in s))
    return out


def is_transposition(a: Sequence[int], b: Sequence[int]) -> bool:
    diff = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    return len(diff) == 2 and a[diff[0]] == b[diff[1]] and a[diff[1]] == b[diff[0]]


def adjacency(members: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Dense 0/1 adjacency of the transposition graph over ``members``."""
    m = len(members)
    adj = np.zeros((m, m), dtype=np.int64)
    for i, j in itertools.combinations(range(m), 2):
        if is_transposition(members[i], members[j]):
            adj[i, j] = adj[j, i] = 1
    return adj


def is_connected(adj: np.ndarray) -> bool:
    m = adj.shape[0]
    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def is_bipartite(adj: np.ndarray) -> bool:
    """Two-colourability of the graph with adjacency ``adj``; self-loops make it false."""
    if np.any(np.diag(adj)):
        return False
    m = adj.shape[0]
    colour = np.full(m, -1)
    for s in range(m):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(adj[u]):
                if colour[v] < 0:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    return False
    return True
