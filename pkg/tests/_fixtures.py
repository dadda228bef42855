"""Random censored datasets shared by the test modules.

All generators keep exact values and finite endpoints distinct, which is
the condition under which the realizability oracle is well defined.
"""

import itertools

import numpy as np
from hypothesis import strategies as st

from rptest.censoring import IntervalObs, Kind, RightObs, realizable


def random_right(rng, n, p_event=0.6):
    times = rng.permutation(np.arange(1, 3 * n + 1))[:n].astype(float)
    events = rng.random(n) < p_event
    return [RightObs(float(t), bool(e)) for t, e in zip(times, events)]


def random_interval(rng, n, kinds=None):
    pool = iter(rng.permutation(np.arange(1, 4 * n + 1)).astype(float).tolist())
    kinds = rng.choice(list(Kind), size=n) if kinds is None else kinds
    return [_make(k, pool) for k in kinds]


def _make(kind, pool):
    if kind is Kind.LEFT:
        return IntervalObs.left_censored(next(pool))
    if kind is Kind.RIGHT:
        return IntervalObs.right_censored(next(pool))
    if kind is Kind.EXACT:
        return IntervalObs.exact(next(pool))
    a, b = sorted((next(pool), next(pool)))
    return IntervalObs.interval(a, b)


def oracle_ranges(obs):
    """Per-coordinate set of ranks seen among realizable permutations (n <= 8)."""
    n = len(obs)
    seen = [set() for _ in range(n)]
    for p in itertools.permutations(range(1, n + 1)):
        if realizable(obs, p):
            for i, v in enumerate(p):
                seen[i].add(v)
    return seen


@st.composite
def right_datasets(draw, min_size=1, max_size=7):
    n = draw(st.integers(min_size, max_size))
    times = draw(st.permutations(list(range(1, 3 * n + 1))))[:n]
    events = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return [RightObs(float(t), e) for t, e in zip(times, events)]


@st.composite
def interval_datasets(draw, min_size=1, max_size=7):
    n = draw(st.integers(min_size, max_size))
    kinds = draw(st.lists(st.sampled_from(list(Kind)), min_size=n, max_size=n))
    pool = iter(float(v) for v in draw(st.permutations(list(range(1, 4 * n + 1)))))
    return [_make(k, pool) for k in kinds]
