import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rptest.censoring import RightObs, rank_bounds
from rptest.errors import ContractViolation, DegenerateNullError, InvalidDatasetError
from rptest.permspace import RestrictedSpace, enumerate_space
from rptest.stats import (
    BivariateData,
    TauSamples,
    TestConfig,
    asymptotic_p_value,
    concordance_mean_matrix,
    kendall_tau,
    kendall_tau_pairwise,
    null_from_relabellings,
    oakes_null,
    oakes_tau,
    p_values,
    permutation_null,
    rp_statistic,
    test_independence,
)

from _fixtures import random_right


@st.composite
def perm_pairs(draw, max_n=60):
    n = draw(st.integers(2, max_n))
    a = draw(st.permutations(list(range(1, n + 1))))
    b = draw(st.permutations(list(range(1, n + 1))))
    return np.array(a), np.array(b)


def exact_rp(sx, sy):
    """Average Kendall tau over the full product of two enumerated spaces."""
    mx, my = enumerate_space(sx), enumerate_space(sy)
    return sum(kendall_tau_pairwise(a, b) for a in mx for b in my) / (len(mx) * len(my))


def complete(values_x, values_y):
    return BivariateData(
        tuple(RightObs(float(v), True) for v in values_x),
        tuple(RightObs(float(v), True) for v in values_y),
    )


class TestKendall:
    def test_identity(self):
        r = np.arange(1, 11)
        assert kendall_tau(r, r) == 1.0

    def test_reversal(self):
        r = np.arange(1, 11)
        assert kendall_tau(r, r[::-1]) == -1.0

    def test_small(self):
        assert kendall_tau([1, 2, 3], [1, 3, 2]) == 1 / 3

    def test_contract(self):
        with pytest.raises(ContractViolation):
            kendall_tau([1, 2], [1, 2, 3])
        with pytest.raises(ContractViolation):
            kendall_tau([1, 1, 2], [1, 2, 3])
        with pytest.raises(ContractViolation):
            kendall_tau([1], [1])

    @settings(max_examples=200, deadline=None)
    @given(perm_pairs())
    def test_fast_equals_pairwise(self, pair):
        a, b = pair
        assert kendall_tau(a, b) == kendall_tau_pairwise(a, b)

    @settings(max_examples=100, deadline=None)
    @given(perm_pairs())
    def test_symmetric(self, pair):
        a, b = pair
        assert kendall_tau(a, b) == kendall_tau(b, a)

    @settings(max_examples=100, deadline=None)
    @given(perm_pairs())
    def test_negation(self, pair):
        a, b = pair
        n = len(a)
        assert kendall_tau(a, n + 1 - b) == pytest.approx(-kendall_tau(a, b), abs=1e-15)


class TestConcordance:
    def test_single_sample(self):
        m = concordance_mean_matrix(np.array([[1, 2]]))
        assert m[0, 1] == 1 and m[1, 0] == -1

    def test_cancels(self):
        assert concordance_mean_matrix(np.array([[1, 2], [2, 1]]))[0, 1] == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 12), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_antisymmetric(self, n, b, seed):
        rng = np.random.default_rng(seed)
        m = concordance_mean_matrix(np.array([rng.permutation(n) + 1 for _ in range(b)]))
        assert np.array_equal(m, -m.T)

    def test_empty(self):
        with pytest.raises(ContractViolation):
            concordance_mean_matrix(np.zeros((0, 3), dtype=int))


class TestRPStatistic:
    def test_complete_data_equals_kendall(self):
        rx = np.array([3, 1, 4, 2, 5])
        ry = np.array([2, 1, 5, 3, 4])
        samples = TauSamples(np.tile(rx, (7, 1)), np.tile(ry, (7, 1)))
        assert rp_statistic(samples) == pytest.approx(kendall_tau(rx, ry), abs=1e-15)
        samples.paired = False
        assert rp_statistic(samples) == pytest.approx(kendall_tau(rx, ry), abs=1e-15)

    def test_exhaustive_pairs_equal_exact_average(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            sx = RestrictedSpace.from_bounds(rank_bounds(random_right(rng, 5)))
            sy = RestrictedSpace.from_bounds(rank_bounds(random_right(rng, 5)))
            mx, my = enumerate_space(sx), enumerate_space(sy)
            xs = np.array([a for a in mx for _ in my])
            ys = np.array([b for _ in mx for b in my])
            want = exact_rp(sx, sy)
            assert rp_statistic(TauSamples(xs, ys)) == pytest.approx(want, abs=1e-12)
            assert rp_statistic(TauSamples(xs, ys, paired=False)) == pytest.approx(want, abs=1e-12)

    def test_two_member_spaces_monte_carlo(self):
        # each margin has |S| = 2, so the exact value averages four taus
        data = BivariateData(
            (RightObs(2.0, False), RightObs(3.0, True), RightObs(1.0, True)),
            (RightObs(1.0, True), RightObs(2.0, False), RightObs(3.0, True)),
        )
        sx, sy = (RestrictedSpace.from_bounds(rank_bounds(list(m))) for m in (data.x, data.y))
        assert len(enumerate_space(sx)) == len(enumerate_space(sy)) == 2
        rep = test_independence(data, TestConfig(mc_samples=100_000, perms=2, burn_in=1000, thin=3, seed=1))
        assert rep.statistic == pytest.approx(exact_rp(sx, sy), abs=0.01)


class TestOakes:
    def test_uncensored_equals_kendall(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            x = rng.permutation(n) + 1
            y = rng.permutation(n) + 1
            ox = [RightObs(float(v), True) for v in x]
            oy = [RightObs(float(v), True) for v in y]
            assert oakes_tau(ox, oy) == pytest.approx(kendall_tau(x, y), abs=1e-15)

    def test_incomparable(self):
        x = [RightObs(1.0, False), RightObs(2.0, True)]
        for y in ([RightObs(1.0, True), RightObs(2.0, True)], [RightObs(2.0, True), RightObs(1.0, True)]):
            assert oakes_tau(x, y) == 0.0

    def test_concordant_pair(self):
        x = [RightObs(1.0, True), RightObs(2.0, True)]
        assert oakes_tau(x, x) == 1.0

    def test_ties_score_zero(self):
        x = [RightObs(1.0, True), RightObs(1.0, True)]
        y = [RightObs(1.0, True), RightObs(2.0, True)]
        assert oakes_tau(x, y) == 0.0

    def test_comparable_censored_pair(self):
        # event at 1 is known to precede a censoring at 2
        x = [RightObs(1.0, True), RightObs(2.0, False)]
        y = [RightObs(1.0, True), RightObs(2.0, True)]
        assert oakes_tau(x, y) == 1.0

    def test_null_identity(self):
        rng = np.random.default_rng(2)
        x, y = random_right(rng, 12), random_right(rng, 12)
        draws = oakes_null(x, y, np.array([np.arange(12)]))
        assert draws[0] == pytest.approx(oakes_tau(x, y), abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            oakes_tau([RightObs(1.0, True)] * 2, [RightObs(1.0, True)] * 3)


class TestPermutationNull:
    def _samples(self, seed=0, n=8, b=30):
        rng = np.random.default_rng(seed)
        xs = np.array([rng.permutation(n) + 1 for _ in range(b)])
        ys = np.array([rng.permutation(n) + 1 for _ in range(b)])
        return TauSamples(xs, ys)

    def test_identity_relabelling(self):
        s = self._samples()
        eta = np.arange(s.n)[None, :]
        assert null_from_relabellings(s, eta)[0] == pytest.approx(rp_statistic(s), abs=1e-15)
        s.paired = False
        assert null_from_relabellings(s, eta)[0] == pytest.approx(rp_statistic(s), abs=1e-15)

    def test_classical_distribution_n3(self):
        r = np.array([[1, 2, 3]])
        etas = np.array(list(itertools.permutations(range(3))))
        draws = null_from_relabellings(TauSamples(r, r), etas)
        assert sorted(np.round(draws * 3).astype(int).tolist()) == [-3, -1, -1, 1, 1, 3]

    def test_mean_zero(self):
        s = self._samples(1)
        draws = permutation_null(s, 10_000, np.random.default_rng(4))
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean()) < 3 * se

    def test_invariant_to_consistent_relabelling_of_x(self):
        s = self._samples(2, n=5, b=6)
        etas = np.array(list(itertools.permutations(range(5))))
        sigma = np.array([2, 0, 4, 1, 3])
        base = np.sort(null_from_relabellings(s, etas))
        moved = np.sort(null_from_relabellings(TauSamples(s.x[:, sigma], s.y), etas))
        assert np.allclose(base, moved, atol=1e-14)

    def test_threads_do_not_change_draws(self):
        s = self._samples(3)
        a = permutation_null(s, 101, np.random.default_rng(5), threads=1)
        b = permutation_null(s, 101, np.random.default_rng(5), threads=3)
        assert np.array_equal(a, b)

    def test_product_mode_matches_bruteforce(self):
        s = self._samples(4, n=6, b=5)
        s.paired = False
        etas = np.array([np.random.default_rng(k).permutation(6) for k in range(5)])
        fast = null_from_relabellings(s, etas)
        for eta, got in zip(etas, fast):
            taus = [kendall_tau_pairwise(a, b[eta]) for a in s.x for b in s.y]
            assert got == pytest.approx(np.mean(taus), abs=1e-14)

    def test_perms_positive(self):
        with pytest.raises(ContractViolation):
            permutation_null(self._samples(), 0, np.random.default_rng())


class TestPValues:
    def test_zero_statistic(self):
        draws = np.array([-0.3, -0.1, 0.1, 0.3])
        p_perm, p_asym = p_values(0.0, draws)
        assert p_perm == 1.0 and p_asym == 1.0

    def test_beyond_all_draws(self):
        draws = np.linspace(-0.5, 0.5, 999)
        assert p_values(0.9, draws)[0] == pytest.approx(1 / 1000)

    def test_normal_quantile(self):
        assert asymptotic_p_value(0.196, 0.01) == pytest.approx(0.05, abs=5e-4)

    def test_two_sided_counts_both_tails(self):
        draws = np.array([-0.5, -0.2, 0.1, 0.4])
        assert p_values(0.4, draws)[0] == pytest.approx(3 / 5)

    def test_degenerate(self):
        with pytest.raises(DegenerateNullError):
            p_values(0.1, [0.2, 0.2, 0.2])

    def test_too_few(self):
        with pytest.raises(ContractViolation):
            p_values(0.1, [0.2])

    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            draws = rng.normal(size=50)
            p_perm, p_asym = p_values(float(rng.normal()), draws)
            assert 0 < p_perm <= 1 and 0 <= p_asym <= 1


class TestPipeline:
    def test_concordant_complete_data(self):
        v = list(range(1, 11))
        rep = test_independence(complete(v, v), TestConfig(mc_samples=10, perms=199, burn_in=10, thin=1, seed=3))
        assert rep.statistic == 1.0
        assert rep.p_perm == pytest.approx(1 / 200)

    def test_report_fields(self):
        rng = np.random.default_rng(9)
        data = BivariateData(tuple(random_right(rng, 15)), tuple(random_right(rng, 15)))
        cfg = TestConfig(mc_samples=40, perms=60, burn_in=50, thin=2, seed=12)
        rep = test_independence(data, cfg)
        d = rep.to_json_dict()
        assert d["schema"] == 1
        assert set(d) == {"schema", "statistic", "variance", "p_perm", "p_asym", "n", "B", "perms", "seed",
                          "estimator", "burn_in", "thin", "elapsed_ms"}
        assert rep.variance == pytest.approx(np.var(rep.null_draws, ddof=1))
        assert -1 <= rep.statistic <= 1 and len(rep.null_draws) == 60

    def test_deterministic_across_threads(self):
        rng = np.random.default_rng(10)
        data = BivariateData(tuple(random_right(rng, 20)), tuple(random_right(rng, 20)))
        reps = []
        for threads in (1, 2, 4):
            cfg = TestConfig(mc_samples=50, perms=80, burn_in=100, thin=3, seed=77, threads=threads)
            d = test_independence(data, cfg).to_json_dict()
            d.pop("elapsed_ms")
            reps.append(d)
        assert reps[0] == reps[1] == reps[2]

    def test_config_validation(self):
        with pytest.raises(ContractViolation):
            TestConfig(estimator="other")
        with pytest.raises(ContractViolation):
            TestConfig(perms=0)

    def test_data_validation(self):
        with pytest.raises(InvalidDatasetError):
            BivariateData((RightObs(1.0, True),), (RightObs(1.0, True),))
        with pytest.raises(InvalidDatasetError):
            BivariateData((RightObs(1.0, True),) * 2, (RightObs(1.0, True),) * 3)
