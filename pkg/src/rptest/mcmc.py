"""Random walks on the restricted permutation graph.

Three chains are provided:

* the *target* walk, which proposes a uniform transposition and stays
  put when it leaves the space (stationary law uniform);
* the *degree* walk, which redraws proposals until one is feasible
  (stationary law proportional to node degree);
* the Metropolis-coupled pair, which advances both and then exchanges
  their states with probability ``min(1, deg(v') / deg(w'))``.

Uniform samples come from the target slot of the coupled pair.  The
exact transition matrices below are built from the closed-form
transition probabilities rather than from the samplers, so they serve
as an independent check on them for small spaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ContractViolation, ConvergenceError, IsolatedNodeError
from .permspace import (
    RestrictedSpace,
    as_rank_vector,
    contains,
    degree,
    enumerate_space,
    initial_permutation,
    is_transposition,
)

DEFAULT_BURN_IN = 5_000
DEFAULT_THIN = 100


@dataclass(frozen=True)
class SamplerConfig:
    count: int
    burn_in: int = DEFAULT_BURN_IN
    thin: int = DEFAULT_THIN
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0:
            raise ContractViolation("burn_in must be >= 0")
        if self.thin < 1:
            raise ContractViolation("thin must be >= 1")
        if self.count < 1:
            raise ContractViolation("count must be >= 1")


@dataclass(frozen=True)
class ChainPair:
    v: tuple[int, ...]
    w: tuple[int, ...]


@dataclass(frozen=True)
class TransitionMatrix:
    states: list[tuple]
    probs: np.ndarray

    def __post_init__(self):
        p = self.probs
        if p.shape != (len(self.states), len(self.states)):
            raise ContractViolation("transition matrix shape does not match its states")
        if np.any(p < 0) or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-12:
            raise ContractViolation("transition matrix must be row-stochastic")


def _member(space: RestrictedSpace, r: Sequence[int]) -> np.ndarray:
    arr = as_rank_vector(r, space.n).copy()
    if not contains(space, arr):
        raise ContractViolation(f"{arr.tolist()} is not a member of the space")
    return arr


def step_target(space: RestrictedSpace, r: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
    arr = _member(space, r)
    _kernels.target_step(space.lo, space.hi, arr, 0, rng)
    return tuple(int(v) for v in arr)


def step_degree(space: RestrictedSpace, r: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
    arr = _member(space, r)
    if degree(space, arr) == 0:
        raise IsolatedNodeError(f"{arr.tolist()} has no neighbours; the degree walk cannot move")
    _kernels.degree_step(space.lo, space.hi, arr, 1, rng)
    return tuple(int(v) for v in arr)


def step_coupled(space: RestrictedSpace, pair: ChainPair, rng: np.random.Generator) -> ChainPair:
    v = _member(space, pair.v)
    w = _member(space, pair.w)
    dw = degree(space, w)
    if dw == 0:
        raise IsolatedNodeError(f"{w.tolist()} has no neighbours; the degree walk cannot move")
    swapped, _, _ = _kernels.coupled_step(space.lo, space.hi, v, degree(space, v), w, dw, rng)
    if swapped:
        v, w = w, v
    return ChainPair(tuple(int(x) for x in v), tuple(int(x) for x in w))


def sample_uniform(space: RestrictedSpace, config: SamplerConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Approximately uniform members of ``space``, one per row.

    Both slots of the coupled pair start from :func:`initial_permutation`.
    After ``burn_in`` steps the target slot is recorded every ``thin``
    steps.  When ``rng`` is omitted it is seeded from ``config.seed``.

    If every bound is ``[1, n]`` each proposal is feasible, both walks
    flip parity at every step and the pair is periodic.  In that case
    (and only then) the pair is made lazy: it holds with probability 1/2
    per step, which keeps its stationary law.  Any narrower bound gives
    every member a rejected proposal, so the target walk is aperiodic.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    start = initial_permutation(space)
    if _kernels.degree(space.lo, space.hi, start) == 0:
        # isolated start: on a connected graph this is the one-member space
        return np.tile(start, (config.count, 1))
    out, _, _ = _kernels.run_coupled(
        space.lo, space.hi, start.copy(), start.copy(), config.burn_in, config.thin, config.count,
        is_periodic(space), rng,
    )
    return out


def is_periodic(space: RestrictedSpace) -> bool:
    """Whether the target walk never stays put, i.e. the space is all of ``Pi_n``."""
    return space.n >= 2 and bool(np.all(space.lo == 1) and np.all(space.hi == space.n))


# --- exact transition matrices for small spaces --------------------------


def _graph(space: RestrictedSpace, limit: int) -> tuple[list[tuple], np.ndarray, np.ndarray]:
    states = enumerate_space(space, limit)
    index = {s: i for i, s in enumerate(states)}
    m = len(states)
    adj = np.zeros((m, m))
    n = space.n
    for i, s in enumerate(states):
        for c in range(n - 1):
            for d in range(c + 1, n):
                t = list(s)
                t[c], t[d] = t[d], t[c]
                j = index.get(tuple(t))
                if j is not None:
                    adj[i, j] = 1.0
    return states, adj, adj.sum(axis=1)


def transition_matrix_target(space: RestrictedSpace, limit: int = 5_000) -> TransitionMatrix:
    """Stay with probability ``1 - deg/K``, move to each neighbour with ``1/K``."""
    states, adj, deg = _graph(space, limit)
    n = space.n
    k = n * (n - 1) / 2
    if k == 0:
        return TransitionMatrix(states, np.ones((1, 1)))
    probs = adj / k + np.diag(1.0 - deg / k)
    return TransitionMatrix(states, probs)


def transition_matrix_degree(space: RestrictedSpace, limit: int = 5_000) -> TransitionMatrix:
    """Move to a uniformly chosen neighbour."""
    states, adj, deg = _graph(space, limit)
    if np.any(deg == 0):
        raise IsolatedNodeError("the degree walk is undefined on a graph with isolated nodes")
    return TransitionMatrix(states, adj / deg[:, None])


def transition_matrix_coupled(space: RestrictedSpace, limit: int = 30) -> TransitionMatrix:
    """Exact kernel of the coupled pair on the product space ``S x S``.

    State ``(a, b)`` has index ``a * |S| + b`` with ``a`` in the target slot.
    """
    states, _, deg = _graph(space, limit)
    p = transition_matrix_target(space, limit).probs
    q = transition_matrix_degree(space, limit).probs
    m = len(states)
    kappa = np.minimum(1.0, deg[:, None] / deg[None, :])  # kappa[r1, r2]
    probs = np.zeros((m * m, m * m))
    for a in range(m):
        for b in range(m):
            row = a * m + b
            # move to (r1, r2) under the two walks, then maybe exchange
            joint = np.outer(p[a], q[b])
            probs[row] += (joint * (1.0 - kappa)).ravel()
            probs[row] += (joint * kappa).T.ravel()
    pair_states = [(s, t) for s in states for t in states]
    return TransitionMatrix(pair_states, probs)


def stationary_distribution(m: TransitionMatrix | np.ndarray, tol: float = 1e-13, max_doublings: int = 80) -> np.ndarray:
    """Left fixed vector of a row-stochastic matrix by power iteration.

    Iterates the lazy kernel ``(I + M) / 2``, which shares the fixed vector
    of ``M`` but is aperiodic, using repeated squaring so that ``2**k``
    steps cost ``k`` matrix products.  Finishes with plain steps of ``M``
    until ``|pi M - pi|_inf < tol``.
    """
    probs = m.probs if isinstance(m, TransitionMatrix) else np.asarray(m, dtype=float)
    size = probs.shape[0]
    if size == 1:
        return np.ones(1)
    power = 0.5 * (np.eye(size) + probs)
    pi = np.full(size, 1.0 / size)
    residual = np.inf
    for _ in range(max_doublings):
        pi = pi @ power
        pi /= pi.sum()
        residual = np.max(np.abs(pi @ probs - pi))
        if residual < tol:
            return pi
        power = power @ power
        power /= power.sum(axis=1, keepdims=True)
    for _ in range(1_000):
        pi = pi @ probs
        pi /= pi.sum()
        residual = np.max(np.abs(pi @ probs - pi))
        if residual < tol:
            return pi
    raise ConvergenceError("power iteration did not converge", residual)
