"""Censored observations and the rank bounds they induce.

Each censored measurement restricts the rank its latent complete value
can take among the ``n`` latent values.  For right-censored and case-2
interval-censored data that restriction is always a contiguous range
``[lo, hi]``, represented here by :class:`RankBounds`.

Intervals are half-open ``(left, right]``.  Exact observations are
degenerate points with ``left == right``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractViolation, InvalidDatasetError


class Kind(enum.Enum):
    LEFT = "left"
    INTERVAL = "interval"
    RIGHT = "right"
    EXACT = "exact"


@dataclass(frozen=True)
class RightObs:
    """Observed time with an event indicator (``event=False`` means censored)."""

    time: float
    event: bool

    def __post_init__(self):
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "event", bool(self.event))
        if not math.isfinite(self.time) or self.time < 0:
            raise InvalidDatasetError(f"time must be finite and >= 0, got {self.time!r}")

    def to_interval(self) -> "IntervalObs":
        if self.event:
            return IntervalObs.exact(self.time)
        return IntervalObs.right_censored(self.time)


@dataclass(frozen=True)
class IntervalObs:
    """Half-open interval ``(left, right]`` known to contain the latent value."""

    left: float
    right: float
    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "left", float(self.left))
        object.__setattr__(self, "right", float(self.right))
        left, right, kind = self.left, self.right, self.kind
        if math.isnan(left) or math.isnan(right):
            raise InvalidDatasetError("interval endpoints must not be NaN")
        if not math.isfinite(left) or left < 0:
            raise InvalidDatasetError(f"left endpoint must be finite and >= 0, got {left!r}")
        if left > right:
            raise InvalidDatasetError(f"left endpoint {left} exceeds right endpoint {right}")
        ok = {
            Kind.LEFT: left == 0 and math.isfinite(right) and right > 0,
            Kind.INTERVAL: 0 < left < right < math.inf,
            Kind.RIGHT: right == math.inf,
            Kind.EXACT: left == right,
        }[kind]
        if not ok:
            raise InvalidDatasetError(f"({left}, {right}] is not a valid {kind.value} observation")

    @classmethod
    def exact(cls, x: float) -> "IntervalObs":
        return cls(x, x, Kind.EXACT)

    @classmethod
    def left_censored(cls, right: float) -> "IntervalObs":
        return cls(0.0, right, Kind.LEFT)

    @classmethod
    def interval(cls, left: float, right: float) -> "IntervalObs":
        return cls(left, right, Kind.INTERVAL)

    @classmethod
    def right_censored(cls, left: float) -> "IntervalObs":
        return cls(left, math.inf, Kind.RIGHT)

    @classmethod
    def from_endpoints(cls, left: float, right: float) -> "IntervalObs":
        """Infer the kind from the endpoints, as used by CSV ingestion."""
        if left == right:
            return cls.exact(left)
        if right == math.inf:
            return cls.right_censored(left)
        if left == 0:
            return cls.left_censored(right)
        return cls.interval(left, right)


class RankBounds(NamedTuple):
    lo: int
    hi: int


def _check_nonempty(obs: Sequence) -> None:
    if len(obs) == 0:
        raise InvalidDatasetError("dataset must contain at least one observation")


def rank_bounds_right(obs: Sequence[RightObs]) -> list[RankBounds]:
    """Admissible rank range of each right-censored observation.

    An event at ``x_i`` can rank anywhere from one past the events
    strictly below it, up to the events at or below it plus the censored
    times strictly below it.  A censored time ranks after every event at
    or below it and may go as high as ``n``.
    """
    _check_nonempty(obs)
    x = np.array([o.time for o in obs], dtype=float)
    event = np.array([bool(o.event) for o in obs])
    n = len(x)
    xe = x[event]
    xc = x[~event]

    below_events = (xe[None, :] < x[:, None]).sum(axis=1)
    upto_events = (xe[None, :] <= x[:, None]).sum(axis=1)
    below_censored = (xc[None, :] < x[:, None]).sum(axis=1)

    lo = np.where(event, below_events + 1, upto_events + 1)
    hi = np.where(event, upto_events + below_censored, n)
    return [RankBounds(int(a), int(b)) for a, b in zip(lo, hi)]


def rank_bounds_interval(obs: Sequence[IntervalObs]) -> list[RankBounds]:
    """Admissible rank range of each case-2 interval-censored observation.

    Exact observations use their value for both endpoints.  The counts
    follow the published bound expressions term by term; the brute-force
    :func:`realizable` oracle certifies them on small datasets.
    """
    _check_nonempty(obs)
    for o in obs:
        if not isinstance(o, IntervalObs):
            raise InvalidDatasetError(f"expected IntervalObs, got {type(o).__name__}")
    n = len(obs)
    L = np.array([o.left for o in obs], dtype=float)
    R = np.array([o.right for o in obs], dtype=float)
    kind = np.array([o.kind.value for o in obs])
    in_l = kind == Kind.LEFT.value
    in_c = kind == Kind.INTERVAL.value
    in_r = kind == Kind.RIGHT.value
    in_u = kind == Kind.EXACT.value
    n_left = int(in_l.sum())

    # rows index i (the observation being bounded), columns index j
    lj_lt_ri = L[None, :] < R[:, None]
    lj_le_ri = L[None, :] <= R[:, None]
    rj_le_li = R[None, :] <= L[:, None]
    rj_lt_li = R[None, :] < L[:, None]

    def count(mask, cols):
        return (mask & cols[None, :]).sum(axis=1)

    hi_left = n_left + count(lj_lt_ri, in_r) + count(lj_lt_ri, in_u) + count(lj_le_ri, in_c)
    hi_mid = n_left + count(lj_lt_ri, in_r | in_c) + count(lj_le_ri, in_u)
    lo_mid = count(rj_le_li, ~in_r) + 1
    lo_exact = count(rj_lt_li, ~in_r) + 1

    lo = np.select([in_l, in_c, in_r, in_u], [np.ones(n, int), lo_mid, lo_mid, lo_exact])
    hi = np.select([in_l, in_c, in_r, in_u], [hi_left, hi_mid, np.full(n, n), hi_mid])
    return [RankBounds(int(a), int(b)) for a, b in zip(lo, hi)]


def rank_bounds(obs: Sequence[RightObs] | Sequence[IntervalObs]) -> list[RankBounds]:
    """Dispatch on observation type."""
    _check_nonempty(obs)
    if all(isinstance(o, RightObs) for o in obs):
        return rank_bounds_right(obs)
    if all(isinstance(o, IntervalObs) for o in obs):
        return rank_bounds_interval(obs)
    raise InvalidDatasetError("a margin must be all RightObs or all IntervalObs")


def realizable(obs: Sequence[IntervalObs] | Sequence[RightObs], r: Sequence[int]) -> bool:
    """Whether latent values consistent with ``obs`` can produce ranking ``r``.

    Brute-force oracle for the rank bounds.  Walks the observations in
    rank order and keeps the greatest lower limit reached so far; every
    interval is entered just above ``max(limit, left)``, which is the
    choice that leaves the most room for later observations.  Requires
    distinct exact values and distinct finite endpoints.
    """
    obs = [o.to_interval() if isinstance(o, RightObs) else o for o in obs]
    n = len(obs)
    ranks = [int(v) for v in r]
    if len(ranks) != n or sorted(ranks) != list(range(1, n + 1)):
        raise ContractViolation(f"{r!r} is not a permutation of 1..{n}")

    order = sorted(range(n), key=lambda i: ranks[i])
    floor = -math.inf
    for i in order:
        o = obs[i]
        if o.kind is Kind.EXACT:
            if not o.left > floor:
                return False
            floor = o.left
        else:
            start = max(floor, o.left)
            if not start < o.right:
                return False
            floor = start
    return True
