"""Oracle tests: exactness at zero noise, replay, budget, statistics."""
import numpy as np
import pytest
from scipy import stats

from convexbench import (
    BudgetError,
    DomainError,
    OracleBatch,
    OracleConfig,
    OracleSession,
    SymmetricPower,
    build_function,
    replicate_seed,
)

F = build_function(SymmetricPower(k=2.0, x_star=0.0), (-2.0, 2.0))


def make_session(sigma=0.1, budget=1000, seed=12345):
    return OracleSession(OracleConfig(sigma=sigma, budget=budget, master_seed=seed), F)


class TestQuery:
    def test_zero_noise_returns_exact_subgradient(self):
        s = make_session(sigma=0.0)
        assert s.query(1.0) == 1.0  # f'(x) = x for the quadratic
        assert s.query(-0.5) == -0.5

    def test_fixed_seed_value_replays(self):
        a = make_session().query(1.0)
        b = make_session().query(1.0)
        assert a == b
        z = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(12345))
        ).standard_normal()
        assert a == 1.0 + 0.1 * z

    def test_large_sample_mean_near_subgradient(self):
        # four standard errors at n = 1e6, sigma = 0.1
        s = make_session(sigma=0.1, budget=1_000_000, seed=777)
        vals = s.query_block(1.0, 1_000_000)
        assert abs(np.mean(vals) - 1.0) < 4 * (0.1 / 1000.0)

    def test_increments_counter(self):
        s = make_session()
        s.query(0.3)
        assert s.queries_used == 1
        s.query_block(0.3, 10)
        assert s.queries_used == 11

    def test_domain_error_does_not_consume_budget(self):
        s = make_session(budget=5)
        with pytest.raises(DomainError):
            s.query(10.0)
        assert s.remaining_budget() == 5


class TestBudget:
    def test_remaining_budget_fresh(self):
        assert make_session(budget=100).remaining_budget() == 100

    def test_remaining_budget_after_queries(self):
        s = make_session(budget=100)
        for _ in range(3):
            s.query(0.0)
        assert s.remaining_budget() == 97

    def test_remaining_budget_after_exhaustion(self):
        s = make_session(budget=4)
        s.query_block(0.1, 4)
        assert s.remaining_budget() == 0

    def test_budget_error_is_distinct_from_domain_error(self):
        s = make_session(budget=1)
        s.query(0.0)
        with pytest.raises(BudgetError):
            s.query(0.0)
        assert not issubclass(BudgetError, DomainError)

    def test_block_overrun_rejected_without_partial_consumption(self):
        s = make_session(budget=10)
        with pytest.raises(BudgetError):
            s.query_block(0.0, 11)
        assert s.remaining_budget() == 10

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(sigma=-0.1, budget=10, master_seed=0)
        with pytest.raises(ValueError):
            OracleConfig(sigma=0.1, budget=0, master_seed=0)


class TestReplay:
    def test_identical_seed_and_queries_bitwise_identical(self):
        pts = [0.1, -0.7, 0.3, 0.3, 1.9]
        out1 = [make_session(seed=99).query(p) for p in [pts[0]]]
        s1, s2 = make_session(seed=99), make_session(seed=99)
        a = [s1.query(p) for p in pts]
        b = [s2.query(p) for p in pts]
        assert a == b
        assert out1[0] == a[0]

    def test_block_matches_scalar_stream(self):
        s1, s2 = make_session(seed=5), make_session(seed=5)
        block = s1.query_block(0.4, 8)
        singles = np.array([s2.query(0.4) for _ in range(8)])
        assert np.array_equal(block, singles)
        # the stream continues identically after a block
        assert s1.query(-0.2) == s2.query(-0.2)

    def test_different_seeds_differ(self):
        assert make_session(seed=1).query(0.5) != make_session(seed=2).query(0.5)


class TestStatistics:
    def test_empirical_variance_within_5_percent(self):
        s = make_session(sigma=0.1, budget=1_000_000, seed=2024)
        vals = s.query_block(0.7, 1_000_000)
        assert np.var(vals, ddof=1) == pytest.approx(0.01, rel=0.05)

    def test_welch_means_agree_across_seeds(self):
        n = 100_000
        a = make_session(sigma=0.1, budget=n, seed=11).query_block(1.0, n)
        b = make_session(sigma=0.1, budget=n, seed=22).query_block(1.0, n)
        t = stats.ttest_ind(a, b, equal_var=False)
        assert t.pvalue > 0.001


class TestOracleBatch:
    def test_matches_scalar_sessions_bitwise(self):
        R, n = 6, 40
        seeds = [replicate_seed(321, 0, 0, r).spawn(2)[1] for r in range(R)]
        batch = OracleBatch(
            spec=F.spec, x_star=None, domain=F.domain,
            sigma=0.1, budget=100, seeds=seeds,
        )
        x = np.linspace(-1.0, 1.0, R)
        got = batch.query_block_all(x, n)
        for r in range(R):
            s = OracleSession(
                OracleConfig(sigma=0.1, budget=100, master_seed=0), F,
                seed=seeds[r],
            )
            want = s.query_block(float(x[r]), n)
            assert np.array_equal(got[r], want)

    def test_single_queries_match_scalar(self):
        R = 4
        seeds = [replicate_seed(55, r).spawn(2)[1] for r in range(R)]
        batch = OracleBatch(F.spec, None, F.domain, 0.2, 10, seeds)
        batch.begin_steps(3)
        xs = np.array([0.1, 0.2, 0.3, 0.4])
        cols = [batch.query_all(xs) for _ in range(3)]
        for r in range(R):
            s = OracleSession(OracleConfig(0.2, 10, 0), F, seed=seeds[r])
            for j in range(3):
                assert cols[j][r] == s.query(float(xs[r]))

    def test_budget_enforced(self):
        seeds = [replicate_seed(1, r) for r in range(3)]
        batch = OracleBatch(F.spec, None, F.domain, 0.1, 5, seeds)
        batch.query_block_all(np.zeros(3), 5)
        with pytest.raises(BudgetError):
            batch.query_all(np.zeros(3))

    def test_domain_enforced(self):
        seeds = [replicate_seed(1, r) for r in range(2)]
        batch = OracleBatch(F.spec, None, F.domain, 0.1, 5, seeds)
        with pytest.raises(DomainError):
            batch.query_all(np.array([0.0, 3.0]))
