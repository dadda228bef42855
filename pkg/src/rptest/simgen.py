"""Simulation designs: copula data, censoring schemes and the size/power runner."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from . import stats
from .censoring import IntervalObs, Kind, RightObs
from .errors import DomainError

MARGINAL_RATE = 0.1
C2_STEP = 3


class Family(enum.Enum):
    CLAYTON = "clayton"
    FRANK = "frank"


@dataclass(frozen=True)
class CopulaSpec:
    family: Family
    tau: float | Fraction

    def __post_init__(self):
        if not 0 <= self.tau < 1:
            raise DomainError(f"tau must lie in [0, 1), got {self.tau}")

    @property
    def parameter(self) -> float:
        if self.tau == 0:
            return 0.0
        if self.family is Family.CLAYTON:
            return clayton_alpha_from_tau(self.tau)
        return frank_beta_from_tau(self.tau)


class Scheme(enum.Enum):
    RIGHT = "right"
    C1 = "c1"
    C2 = "c2"


@dataclass(frozen=True)
class ScenarioSpec:
    scheme: Scheme
    n: int
    c_r: float
    c_l: float = 3.0
    reps: int = 500
    level: float = 0.05

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if self.c_r <= 0 or self.c_l <= 0:
            raise DomainError("censoring bounds must be positive")
        if self.scheme is Scheme.C2 and not _is_step_multiple(self.c_r):
            raise DomainError(f"C2 needs c_R to be a positive multiple of {C2_STEP}")


def _is_step_multiple(c: float) -> bool:
    q = c / C2_STEP
    return q >= 1 and abs(q - round(q)) < 1e-9


def clayton_alpha_from_tau(tau: float | Fraction) -> float:
    """``2 tau / (1 - tau)``; a :class:`~fractions.Fraction` input is converted exactly."""
    if not 0 <= tau < 1:
        raise DomainError(f"tau must lie in [0, 1), got {tau}")
    return float(2 * tau / (1 - tau))


def debye1(beta: float) -> float:
    """First-order Debye function ``(1/b) * int_0^b t / (e^t - 1) dt``."""
    if beta == 0:
        return 1.0
    if abs(beta) < 1e-3:
        b2 = beta * beta
        return 1 - beta / 4 + b2 / 36 - b2 * b2 / 3600
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t else 1.0, 0.0, beta, epsabs=1e-13, epsrel=1e-12)
    return val / beta


def frank_tau(beta: float) -> float:
    return 1 + 4 / beta * (debye1(beta) - 1)


def frank_beta_from_tau(tau: float) -> float:
    if not 0 < tau < 1:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    hi = 1.0
    while frank_tau(hi) < tau:
        hi *= 2
        if hi > 1e6:
            raise DomainError(f"tau {tau} is too close to 1")
    return optimize.bisect(lambda b: frank_tau(b) - tau, 1e-12, hi, xtol=1e-10, maxiter=500)


def copula_sample(spec: CopulaSpec, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``(u1, u2)`` pairs by conditional inversion; shape ``(size, 2)`` or ``(2,)``."""
    m = 1 if size is None else size
    u1 = rng.random(m)
    w = rng.random(m)
    theta = spec.parameter
    if theta == 0:
        u2 = w
    elif spec.family is Family.CLAYTON:
        u2 = (u1 ** (-theta) * (w ** (-theta / (1 + theta)) - 1) + 1) ** (-1 / theta)
    else:
        e1 = np.exp(-theta * u1)
        u2 = -np.log1p(w * math.expm1(-theta) / (w + (1 - w) * e1)) / theta
    out = np.column_stack([u1, u2])
    return out[0] if size is None else out


def marginal_inverse(u):
    """Inverse of the exponential CDF ``1 - exp(-0.1 x)``."""
    arr = np.asarray(u, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DomainError("u must lie strictly inside (0, 1)")
    out = -np.log1p(-arr) / MARGINAL_RATE
    return float(out) if np.ndim(u) == 0 else out


def complete_pairs(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    return marginal_inverse(copula_sample(spec, rng, n))


def censor_right(value: float, censor: float) -> RightObs:
    return RightObs(min(value, censor), bool(value <= censor))


def apply_right_censoring(pairs: np.ndarray, c_r: float, rng: np.random.Generator) -> stats.BivariateData:
    """Independent ``U(0, c_r)`` censoring times for each margin."""
    pairs = np.asarray(pairs, dtype=float)
    cens = rng.uniform(0.0, c_r, size=pairs.shape)
    x = tuple(censor_right(v, c) for v, c in zip(pairs[:, 0], cens[:, 0]))
    y = tuple(censor_right(v, c) for v, c in zip(pairs[:, 1], cens[:, 1]))
    return stats.BivariateData(x, y)


def bracket_case2(value: float, t1: float, t2: float) -> IntervalObs:
    if value <= t1:
        return IntervalObs.left_censored(t1)
    if value <= t2:
        return IntervalObs.interval(t1, t2)
    return IntervalObs.right_censored(t2)


def apply_interval_censoring_c1(pairs: np.ndarray, c_l: float, c_r: float, rng: np.random.Generator) -> stats.BivariateData:
    """Examination times ``T1 ~ U(0, c_l)``, ``T2 = T1 + U(0, c_r)`` per margin."""
    pairs = np.asarray(pairs, dtype=float)
    t1 = rng.uniform(0.0, c_l, size=pairs.shape)
    t2 = t1 + rng.uniform(0.0, c_r, size=pairs.shape)
    margins = [
        tuple(bracket_case2(v, a, b) for v, a, b in zip(pairs[:, k], t1[:, k], t2[:, k])) for k in (0, 1)
    ]
    return stats.BivariateData(*margins)


def bucket_c2(value: float, c_r: float) -> IntervalObs:
    if value > c_r:
        return IntervalObs.right_censored(float(c_r))
    upper = max(1, math.ceil(value / C2_STEP)) * C2_STEP
    if upper == C2_STEP:
        return IntervalObs.left_censored(float(C2_STEP))
    return IntervalObs.interval(float(upper - C2_STEP), float(upper))


def apply_interval_censoring_c2(pairs: np.ndarray, c_r: float) -> stats.BivariateData:
    """Visits every three time units up to ``c_r``; later events are right-censored at ``c_r``."""
    if not _is_step_multiple(c_r):
        raise DomainError(f"c_R must be a positive multiple of {C2_STEP}")
    pairs = np.asarray(pairs, dtype=float)
    x = tuple(bucket_c2(v, c_r) for v in pairs[:, 0])
    y = tuple(bucket_c2(v, c_r) for v in pairs[:, 1])
    return stats.BivariateData(x, y)


def censor(pairs: np.ndarray, scenario: ScenarioSpec, rng: np.random.Generator) -> stats.BivariateData:
    if scenario.scheme is Scheme.RIGHT:
        return apply_right_censoring(pairs, scenario.c_r, rng)
    if scenario.scheme is Scheme.C1:
        return apply_interval_censoring_c1(pairs, scenario.c_l, scenario.c_r, rng)
    return apply_interval_censoring_c2(pairs, scenario.c_r)


def censoring_rates(data: stats.BivariateData) -> dict[str, float]:
    """Fraction of margins in each censoring class, pooled over both margins."""
    obs = list(data.x) + list(data.y)
    m = len(obs)
    if isinstance(obs[0], RightObs):
        return {"censored": sum(not o.event for o in obs) / m}
    counts = {k.value: 0 for k in Kind}
    for o in obs:
        counts[o.kind.value] += 1
    return {k: v / m for k, v in counts.items()}


# --- replicated experiment -----------------------------------------------


@dataclass(frozen=True)
class Budgets:
    mc_samples: int = 1000
    perms: int = 1000
    burn_in: int = 5_000
    thin: int = 100


@dataclass
class ReplicateResult:
    estimates: dict[str, float]
    p_perm: dict[str, float]
    p_asym: dict[str, float]


def run_replicate(copula: CopulaSpec, scenario: ScenarioSpec, budgets: Budgets, seed: np.random.SeedSequence, estimator: str = "paired") -> ReplicateResult:
    data_seq, test_seq, oakes_seq = seed.spawn(3)
    rng = np.random.default_rng(data_seq)
    data = censor(complete_pairs(copula, scenario.n, rng), scenario, rng)
    cfg = stats.TestConfig(
        mc_samples=budgets.mc_samples,
        perms=budgets.perms,
        burn_in=budgets.burn_in,
        thin=budgets.thin,
        seed=int(test_seq.generate_state(1, np.uint64)[0]),
        estimator=estimator,
    )
    rep = stats.test_independence(data, cfg)
    est = {"RP": rep.statistic}
    pp = {"RP": rep.p_perm}
    pa = {"RP": rep.p_asym}
    if scenario.scheme is Scheme.RIGHT:
        tau_o = stats.oakes_tau(data.x, data.y)
        etas = stats.draw_relabellings(data.n, budgets.perms, np.random.default_rng(oakes_seq))
        draws = stats.oakes_null(data.x, data.y, etas)
        est["Oakes"] = tau_o
        pp["Oakes"], pa["Oakes"] = stats.p_values(tau_o, draws)
    return ReplicateResult(est, pp, pa)


def summarize(results: Sequence[ReplicateResult], tau: float | Fraction, level: float) -> dict[str, dict[str, float]]:
    """Bias, MSE, EP-A and EP-P per estimator; a replicate rejects when ``p <= level``."""
    out = {}
    for name in results[0].estimates:
        est = np.array([r.estimates[name] for r in results])
        out[name] = {
            "bias": float(est.mean() - float(tau)),
            "mse": float(np.mean((est - float(tau)) ** 2)),
            "ep_a": float(np.mean([r.p_asym[name] <= level for r in results])),
            "ep_p": float(np.mean([r.p_perm[name] <= level for r in results])),
        }
    return out


def run_experiment(
    copula: CopulaSpec,
    scenario: ScenarioSpec,
    budgets: Budgets,
    seed: int,
    estimator: str = "paired",
    threads: int = 1,
) -> dict[str, dict[str, float]]:
    """Replicate generate, censor and test ``scenario.reps`` times.

    Replicate ``i`` draws from child ``i`` of ``SeedSequence(seed)``, so the
    summary does not depend on ``threads``.
    """
    seqs = np.random.SeedSequence(seed).spawn(scenario.reps)

    def one(seq):
        return run_replicate(copula, scenario, budgets, seq, estimator)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, seqs))
    else:
        results = [one(s) for s in seqs]
    return summarize(results, copula.tau, scenario.level)
