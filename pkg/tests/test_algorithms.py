"""Sign-testing binary search, flat-set diagnostics, projected SGD."""
import math

import numpy as np
import pytest

from convexbench import (
    Absolute,
    BinarySearchParams,
    BudgetError,
    OracleConfig,
    OracleSession,
    ScheduleError,
    SgdParams,
    SymmetricPower,
    build_function,
    epochs_schedule,
    err,
    flat_set_diagnostics,
    sgd,
    sign_test_binary_search,
)


def session_for(spec, sigma, budget, seed=202, domain=(-2.0, 2.0)):
    f = build_function(spec, domain)
    cfg = OracleConfig(sigma=sigma, budget=budget, master_seed=seed)
    return OracleSession(cfg, f), f


class TestEpochsSchedule:
    def test_reference_values(self):
        assert epochs_schedule(10000, 0.5) == (4, 2500)
        assert epochs_schedule(100, 1.0) == (4, 25)

    def test_too_small_budget(self):
        with pytest.raises(ScheduleError):
            epochs_schedule(2, 0.5)

    def test_total_queries_never_exceed_budget(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            T = int(rng.integers(2, 100_000))
            r = float(rng.uniform(0.05, 4.0))
            try:
                E, T0 = epochs_schedule(T, r)
            except ScheduleError:
                assert math.floor(r * math.log(T)) < 1 or T // max(
                    1, math.floor(r * math.log(T))
                ) < 1
                continue
            assert E >= 1 and T0 >= 1
            assert E * T0 <= T
            assert E == math.floor(r * math.log(T))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            epochs_schedule(0, 1.0)
        with pytest.raises(ValueError):
            epochs_schedule(100, 0.0)


class TestBinarySearch:
    def test_noiseless_convergence_bound(self):
        # E = 10 rounds: floor(r ln 100) = 10 with r = 10/ln(100)
        r = 10.0 / math.log(100) + 1e-12
        s, f = session_for(SymmetricPower(k=2.0, x_star=0.25), 0.0, 100)
        res = sign_test_binary_search(
            s, BinarySearchParams(r=r, initial_interval=(-2.0, 2.0))
        )
        assert res.queries_used == 100  # E*T0 = 10*10
        assert abs(res.estimate - 0.25) <= 2**-10 * 4.0

    def test_single_round_step(self):
        # midpoint 0, subgradient f'(0) = -0.25 < 0 -> keep right half (0, 2)
        s, f = session_for(SymmetricPower(k=2.0, x_star=0.25), 0.0, 8)
        res = sign_test_binary_search(
            s, BinarySearchParams(r=0.5, initial_interval=(-2.0, 2.0))
        )  # E = floor(0.5 ln 8) = 1
        assert len(res.trace) == 1
        rec = res.trace[0]
        assert rec.query_point == 0.0
        assert rec.mean_gradient == -0.25
        assert rec.interval == (0.0, 2.0)

    def test_interval_width_exactly_halves(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a0 = float(rng.uniform(-3, 0))
            b0 = float(rng.uniform(0.5, 3))
            s, f = session_for(
                SymmetricPower(k=2.0, x_star=0.1), 0.3, 200, domain=(-3.0, 3.0)
            )
            res = sign_test_binary_search(
                s, BinarySearchParams(r=1.0, initial_interval=(a0, b0))
            )
            for rec in res.trace:
                assert rec.width == (b0 - a0) * 0.5**rec.round

    def test_estimate_is_midpoint_of_final_interval(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.1, 500)
        res = sign_test_binary_search(
            s, BinarySearchParams(r=1.0, initial_interval=(-2.0, 2.0))
        )
        lo, hi = res.trace[-1].interval
        assert res.estimate == lo + 0.5 * res.trace[-1].width

    def test_query_accounting_exact(self):
        s, f = session_for(SymmetricPower(k=3.0), 0.1, 1000)
        res = sign_test_binary_search(
            s, BinarySearchParams(r=1.5, initial_interval=(-2.0, 2.0))
        )
        E, T0 = epochs_schedule(1000, 1.5)
        assert res.queries_used == E * T0 == s.queries_used

    def test_budget_error_propagates(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.1, 100)
        s.query_block(0.0, 99)  # leave less than E*T0
        with pytest.raises(BudgetError):
            sign_test_binary_search(
                s, BinarySearchParams(r=1.0, initial_interval=(-2.0, 2.0))
            )

    def test_schedule_error_propagates(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.1, 2)
        with pytest.raises(ScheduleError):
            sign_test_binary_search(
                s, BinarySearchParams(r=0.5, initial_interval=(-2.0, 2.0))
            )

    def test_minimizer_outside_interval_converges_to_endpoint(self):
        s, f = session_for(SymmetricPower(k=2.0, x_star=1.5), 0.0, 100)
        res = sign_test_binary_search(
            s, BinarySearchParams(r=2.0, initial_interval=(-2.0, 0.0))
        )
        E, _ = epochs_schedule(100, 2.0)
        assert abs(res.estimate - 0.0) <= 2.0**-E * 2.0  # nearest endpoint region

    def test_noiseless_error_bound_random_targets(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            x_star = float(rng.uniform(-1, 1))
            T = int(rng.integers(50, 2000))
            r = float(rng.uniform(0.8, 2.0))
            try:
                E, T0 = epochs_schedule(T, r)
            except ScheduleError:
                continue
            s, f = session_for(SymmetricPower(k=2.0, x_star=x_star), 0.0, T)
            res = sign_test_binary_search(
                s, BinarySearchParams(r=r, initial_interval=(-2.0, 2.0))
            )
            assert err(res.estimate, f) <= 2.0**-E * 4.0


class TestFlatSetDiagnostics:
    def test_reference_constant(self):
        f = build_function(SymmetricPower(k=2.0), (-2.0, 2.0))
        c_delta, i_delta, radius = flat_set_diagnostics(
            f, T=10000, r=0.5, delta=0.05, sigma=0.1
        )
        # sigma * sqrt(2 ln(E/delta)) with E = 4: 0.1 * sqrt(2 ln 80)
        assert c_delta == pytest.approx(0.1 * math.sqrt(2 * math.log(80.0)), rel=1e-12)
        assert c_delta == pytest.approx(0.2960, abs=1e-4)
        thr = c_delta / math.sqrt(2500)
        assert i_delta[0] == pytest.approx(-thr, abs=1e-9)
        assert i_delta[1] == pytest.approx(thr, abs=1e-9)
        assert radius == 2.0**-4 * 4.0

    def test_delta_near_one_shrinks_constant(self):
        f = build_function(SymmetricPower(k=2.0), (-2.0, 2.0))
        c_delta, _, _ = flat_set_diagnostics(
            f, T=8, r=0.5, delta=0.999, sigma=0.1
        )  # E = 1
        assert 0.0 < c_delta < 0.005

    def test_absolute_flat_set_is_minimizer(self):
        f = build_function(Absolute(0.0), (-2.0, 2.0))
        _, (lo, hi), _ = flat_set_diagnostics(f, T=10000, r=0.5, delta=0.05, sigma=0.1)
        assert abs(lo) <= 1e-10 and abs(hi) <= 1e-10

    def test_custom_initial_interval_changes_radius(self):
        f = build_function(SymmetricPower(k=2.0), (-2.0, 2.0))
        _, _, radius = flat_set_diagnostics(
            f, T=10000, r=0.5, delta=0.05, sigma=0.1, initial_interval=(-1.0, 1.0)
        )
        assert radius == 2.0**-4 * 2.0

    def test_schedule_error_propagates(self):
        f = build_function(SymmetricPower(k=2.0), (-2.0, 2.0))
        with pytest.raises(ScheduleError):
            flat_set_diagnostics(f, T=2, r=0.5, delta=0.05, sigma=0.1)

    def test_coverage_empirical(self):
        # the search lands within the resolution bound of the flat interval
        # in all but a delta-fraction of replicates (small pilot; the
        # acceptance suite runs the full-size version)
        n, T, rr, delta, sigma = 200, 10000, 0.5, 0.05, 0.1
        rng = np.random.default_rng(42)
        fails = 0
        for i in range(n):
            x_star = float(rng.uniform(-1, 1))
            s, f = session_for(
                SymmetricPower(k=2.0, x_star=x_star), sigma, T, seed=1000 + i
            )
            res = sign_test_binary_search(
                s, BinarySearchParams(r=rr, initial_interval=(-2.0, 2.0), delta=delta)
            )
            _, (lo, hi), radius = flat_set_diagnostics(f, T, rr, delta, sigma)
            dist = max(0.0, lo - res.estimate, res.estimate - hi)
            fails += dist > radius
        assert fails / n <= delta + 3 * math.sqrt(delta * (1 - delta) / n)


class TestSgd:
    def test_first_step_cancels_exactly_for_quadratic(self):
        # eta(1) = 1 and the subgradient at x equals x - x_star
        s, f = session_for(SymmetricPower(k=2.0, x_star=0.0), 0.0, 2)
        params = SgdParams(
            schedule="1/t", projection_interval=(-2.0, 2.0)
        ).with_x0(0.7)
        res = sgd(s, params, record_trace=True)
        assert res.trace[0].query_point == 0.7
        assert res.trace[1].query_point == 0.0

    def test_start_point_projected_before_first_query(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.0, 1)
        params = SgdParams(
            schedule="1/t", projection_interval=(-2.0, 2.0)
        ).with_x0(-3.0)
        res = sgd(s, params, record_trace=True)
        assert res.trace[0].query_point == -2.0

    def test_every_query_inside_projection_interval(self):
        s, f = session_for(SymmetricPower(k=3.0), 0.5, 400)
        params = SgdParams(
            schedule="1/sqrt(t)", projection_interval=(-2.0, 2.0)
        ).with_x0(1.9)
        res = sgd(s, params, record_trace=True)
        assert len(res.trace) == 400
        for rec in res.trace:
            assert -2.0 <= rec.query_point <= 2.0
        assert -2.0 <= res.estimate <= 2.0

    def test_consumes_exactly_budget(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.1, 123)
        params = SgdParams(schedule="1/t", projection_interval=(-2.0, 2.0)).with_x0(0.5)
        res = sgd(s, params)
        assert res.queries_used == 123 == s.queries_used
        assert s.remaining_budget() == 0

    def test_average_iterate(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.0, 3)
        params = SgdParams(
            schedule="1/t", projection_interval=(-2.0, 2.0), iterate="average"
        ).with_x0(0.9)
        res = sgd(s, params, record_trace=True)
        pts = [rec.query_point for rec in res.trace]
        assert res.estimate == pytest.approx(np.mean(pts), rel=1e-15)

    def test_unresolved_uniform_start_rejected(self):
        s, f = session_for(SymmetricPower(k=2.0), 0.1, 10)
        params = SgdParams(schedule="1/t", projection_interval=(-2.0, 2.0))
        with pytest.raises(ValueError):
            sgd(s, params)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SgdParams(schedule="1/t^2", projection_interval=(-2.0, 2.0))
        with pytest.raises(ValueError):
            SgdParams(schedule="1/t", projection_interval=(-2.0, 2.0), scale=0.0)
        with pytest.raises(ValueError):
            SgdParams(schedule="1/t", projection_interval=(2.0, -2.0))
        with pytest.raises(ValueError):
            BinarySearchParams(r=-1.0, initial_interval=(-2.0, 2.0))
        with pytest.raises(ValueError):
            BinarySearchParams(r=1.0, initial_interval=(-2.0, 2.0), delta=1.5)
