"""Restricted-permutation independence test for bivariate censored data."""

from .censoring import IntervalObs, Kind, RankBounds, RightObs, rank_bounds, rank_bounds_interval, rank_bounds_right
from .mcmc import SamplerConfig, sample_uniform
from .permspace import RestrictedSpace
from .stats import BivariateData, TestConfig, TestReport, kendall_tau, oakes_tau, test_independence

__all__ = [
    "BivariateData",
    "IntervalObs",
    "Kind",
    "RankBounds",
    "RestrictedSpace",
    "RightObs",
    "SamplerConfig",
    "TestConfig",
    "TestReport",
    "kendall_tau",
    "oakes_tau",
    "rank_bounds",
    "rank_bounds_interval",
    "rank_bounds_right",
    "sample_uniform",
    "test_independence",
]
