"""Monte-Carlo risk estimation, rate fitting, risk floors, superefficiency.

The harness is deterministic given the master seed: replicate r of cell
(algorithm a, budget index i) owns the seed stream
``SeedSequence(master_seed, spawn_key=(a, i, r))``, split once into an
environment stream (minimizer draw, SGD start) and an oracle noise stream.
Cells are therefore independent of execution order and worker count, and
replicate reductions use numpy's pairwise summation in canonical replicate
order.

Replicates inside a cell run vectorized (lockstep over replicates); the
result is bitwise identical to running one scalar OracleSession per
replicate, which the test suite checks directly.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _scipy_stats

from .algorithms import UNIFORM_START, epochs_schedule
from .errors import DataError, ScheduleError
from .functions import (
    ConvexFunction1D,
    FunctionSpec,
    Tilt,
    build_function,
    pair_distance_d,
    spec_id,
    with_x_star,
)
from .modulus import modulus_numeric
from .oracle import OracleBatch, replicate_seed

__all__ = [
    "UniformDist",
    "FunctionFamily",
    "BinarySearchSpec",
    "SgdSpec",
    "ConstantEstimator",
    "ExperimentConfig",
    "RiskRow",
    "RiskTable",
    "SlopeFit",
    "SuperefficiencyReport",
    "estimate_risk",
    "fit_loglog_slope",
    "replicate_runs",
    "two_point_floor",
    "superefficiency_experiment",
    "function_id",
    "DELTA_MAX",
]


@dataclass(frozen=True)
class UniformDist:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class FunctionFamily:
    """A spec template whose minimizer location is drawn per replicate."""

    template: FunctionSpec
    x_star: UniformDist


@dataclass(frozen=True)
class BinarySearchSpec:
    r: float
    delta: float = 0.05

    @property
    def algorithm_id(self) -> str:
        return f"binary-search(r={self.r:g})"


@dataclass(frozen=True)
class SgdSpec:
    schedule: str  # "1/t" | "1/sqrt(t)"
    scale: float = 1.0
    iterate: str = "last"
    x0: float | str = UNIFORM_START

    def __post_init__(self):
        if self.schedule not in ("1/t", "1/sqrt(t)"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    @property
    def algorithm_id(self) -> str:
        extras = []
        if self.scale != 1.0:
            extras.append(f"scale={self.scale:g}")
        if self.iterate != "last":
            extras.append("avg")
        tail = (";" + ";".join(extras)) if extras else ""
        return f"sgd({self.schedule}{tail})"


AlgorithmSpec = BinarySearchSpec | SgdSpec


@dataclass(frozen=True)
class ConstantEstimator:
    """Estimator that returns a fixed point and never queries the oracle."""

    x_hat: float

    @property
    def algorithm_id(self) -> str:
        return f"constant(x={self.x_hat:g})"


@dataclass(frozen=True)
class ExperimentConfig:
    function: FunctionSpec | FunctionFamily
    algorithms: tuple[AlgorithmSpec, ...]
    T_grid: tuple[int, ...]
    replicates: int
    sigma: float
    master_seed: int
    initial_interval: tuple[float, float] = (-2.0, 2.0)

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(t2 <= t1 for t1, t2 in zip(self.T_grid, self.T_grid[1:])):
            raise ValueError("T_grid must be strictly increasing")
        if len(self.T_grid) == 0:
            raise ValueError("T_grid must be nonempty")
        if len(self.algorithms) == 0:
            raise ValueError("need at least one algorithm")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def function_id(function: FunctionSpec | FunctionFamily) -> str:
    if isinstance(function, FunctionFamily):
        d = function.x_star
        return f"{spec_id(function.template)};x*~U({d.lo:g},{d.hi:g})"
    return spec_id(function)


@dataclass(frozen=True)
class RiskRow:
    function: str
    algorithm: str
    T: int
    mean_err: float | None  # None marks a missing cell (schedule error)
    stderr: float | None
    n: int


@dataclass(frozen=True)
class RiskTable:
    rows: tuple[RiskRow, ...]

    def select(self, function: str | None = None, algorithm: str | None = None):
        out = []
        for r in self.rows:
            if function is not None and r.function != function:
                continue
            if algorithm is not None and r.algorithm != algorithm:
                continue
            out.append(r)
        return out


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr_slope: float
    T_range: tuple[int, int]


# ---------------------------------------------------------------------------
# vectorized replicate runners (bitwise-faithful to the scalar sessions)
# ---------------------------------------------------------------------------


def _draw_environment(
    function: FunctionSpec | FunctionFamily,
    alg: AlgorithmSpec,
    initial_interval: tuple[float, float],
    env_seeds,
):
    """Per-replicate minimizer draws and SGD starts, in a fixed draw order.

    Order per replicate: the minimizer location first (families only), then
    the SGD starting point (uniform starts only).
    """
    R = len(env_seeds)
    need_xstar = isinstance(function, FunctionFamily)
    need_x0 = isinstance(alg, SgdSpec) and alg.x0 == UNIFORM_START
    xstar = np.empty(R) if need_xstar else None
    x0 = np.empty(R) if need_x0 else None
    if need_xstar or need_x0:
        a0, b0 = initial_interval
        for i, ss in enumerate(env_seeds):
            g = np.random.Generator(np.random.PCG64(ss))
            if need_xstar:
                xstar[i] = g.uniform(function.x_star.lo, function.x_star.hi)
            if need_x0:
                x0[i] = g.uniform(a0, b0)
    if isinstance(alg, SgdSpec) and not need_x0:
        x0 = np.full(R, float(alg.x0))
    return xstar, x0


def _minimizer_intervals(
    function: FunctionSpec | FunctionFamily,
    initial_interval: tuple[float, float],
    xstar: np.ndarray | None,
    R: int,
):
    """Per-replicate minimizer intervals as (lo, hi) arrays."""
    if isinstance(function, FunctionFamily):
        lo = np.empty(R)
        hi = np.empty(R)
        for i in range(R):
            f = build_function(with_x_star(function.template, xstar[i]), initial_interval)
            lo[i], hi[i] = f.minimizer_set
        return lo, hi
    f = build_function(function, initial_interval)
    ml, mr = f.minimizer_set
    return np.full(R, ml), np.full(R, mr)


def _run_binary_search_batch(batch: OracleBatch, r: float,
                             initial_interval: tuple[float, float]) -> np.ndarray:
    E, T0 = epochs_schedule(batch.budget, r)
    a0, b0 = initial_interval
    a = np.full(batch.n_replicates, float(a0))
    width = float(b0) - float(a0)
    for _ in range(E):
        x = a + 0.5 * width
        values = batch.query_block_all(x, T0)
        z_bar = values.mean(axis=1)
        width = width * 0.5
        a = np.where(z_bar > 0, a, x)
    return a + 0.5 * width


def _run_sgd_batch(batch: OracleBatch, alg: SgdSpec, x0: np.ndarray,
                   projection_interval: tuple[float, float]) -> np.ndarray:
    T = batch.budget
    lo, hi = projection_interval
    c = alg.scale
    inv_t = alg.schedule == "1/t"
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    total = np.zeros_like(x)
    batch.begin_steps(T)
    for t in range(1, T + 1):
        v = batch.query_all(x)
        total += x
        eta = c / t if inv_t else c / math.sqrt(t)
        x = np.clip(x - eta * v, lo, hi)
    return total / T if alg.iterate == "average" else x


def replicate_runs(
    function: FunctionSpec | FunctionFamily,
    initial_interval: tuple[float, float],
    sigma: float,
    T: int,
    alg: AlgorithmSpec,
    replicates: int,
    master_seed: int,
    key: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray | None]:
    """Run one (algorithm, budget) cell over seeded replicates, in lockstep.

    Returns (estimates, minimizer draws or None); bitwise identical to
    running one scalar OracleSession per replicate with the same seeds.
    Raises ScheduleError when the budget cannot support the round schedule.
    """
    if isinstance(alg, BinarySearchSpec):
        epochs_schedule(T, alg.r)  # fail fast before drawing anything
    streams = [replicate_seed(master_seed, *key, rep).spawn(2)
               for rep in range(replicates)]
    env_seeds = [s[0] for s in streams]
    noise_seeds = [s[1] for s in streams]
    xstar, x0 = _draw_environment(function, alg, initial_interval, env_seeds)
    template = function.template if isinstance(function, FunctionFamily) else function
    batch = OracleBatch(
        spec=template,
        x_star=xstar,
        domain=initial_interval,
        sigma=sigma,
        budget=T,
        seeds=noise_seeds,
    )
    if isinstance(alg, BinarySearchSpec):
        estimates = _run_binary_search_batch(batch, alg.r, initial_interval)
    else:
        estimates = _run_sgd_batch(batch, alg, x0, initial_interval)
    return estimates, xstar


def _replicate_errors(
    function: FunctionSpec | FunctionFamily,
    initial_interval: tuple[float, float],
    sigma: float,
    T: int,
    alg: AlgorithmSpec,
    replicates: int,
    master_seed: int,
    key: tuple[int, ...],
) -> np.ndarray:
    """Per-replicate distances to the minimizer for one (algorithm, T) cell."""
    estimates, xstar = replicate_runs(
        function, initial_interval, sigma, T, alg, replicates, master_seed, key
    )
    ml, mr = _minimizer_intervals(function, initial_interval, xstar, replicates)
    return np.maximum(0.0, np.maximum(ml - estimates, estimates - mr))


def _cell_worker(config: ExperimentConfig, a_idx: int, t_idx: int) -> RiskRow:
    alg = config.algorithms[a_idx]
    T = config.T_grid[t_idx]
    fn_id = function_id(config.function)
    try:
        errs = _replicate_errors(
            config.function,
            config.initial_interval,
            config.sigma,
            T,
            alg,
            config.replicates,
            config.master_seed,
            key=(a_idx, t_idx),
        )
    except ScheduleError:
        return RiskRow(fn_id, alg.algorithm_id, T, None, None, 0)
    n = len(errs)
    mean = float(np.mean(errs))
    stderr = float(np.std(errs, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return RiskRow(fn_id, alg.algorithm_id, T, mean, stderr, n)


def estimate_risk(config: ExperimentConfig, jobs: int = 1) -> RiskTable:
    """Monte-Carlo risk table over all (algorithm, budget) cells.

    Deterministic given the master seed: independent of ``jobs`` and of cell
    execution order.  Cells whose schedule is infeasible appear with
    mean_err = None rather than crashing the run.
    """
    cells = [
        (a_idx, t_idx)
        for a_idx in range(len(config.algorithms))
        for t_idx in range(len(config.T_grid))
    ]
    if jobs <= 1 or len(cells) <= 1:
        rows = [_cell_worker(config, a, t) for a, t in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_cell_worker, config, a, t) for a, t in cells]
            rows = [f.result() for f in futures]  # canonical cell order
    return RiskTable(tuple(rows))


def fit_loglog_slope(
    table: RiskTable, function: str, algorithm: str
) -> SlopeFit:
    """OLS fit of ln(mean error) against ln(T) for one risk curve."""
    rows = [
        r
        for r in table.select(function=function, algorithm=algorithm)
        if r.mean_err is not None and r.mean_err > 0
    ]
    if len(rows) < 3:
        raise DataError(
            f"need >= 3 positive risk points for {function!r}/{algorithm!r}, "
            f"got {len(rows)}"
        )
    ts = np.array([r.T for r in rows], dtype=float)
    ys = np.array([r.mean_err for r in rows])
    fit = _scipy_stats.linregress(np.log(ts), np.log(ys))
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr_slope=float(fit.stderr),
        T_range=(int(ts.min()), int(ts.max())),
    )


def two_point_floor(d: float, kappa: float, T: int, sigma: float) -> float:
    """Risk floor (d/4) * exp(-T * kappa^2 / (4 sigma^2)).

    No algorithm distinguishing two functions at minimizer distance d and
    subgradient separation kappa can push the worse of its two risks below
    this value.
    """
    if d < 0 or kappa < 0:
        raise ValueError("d and kappa must be nonnegative")
    if T < 0:
        raise ValueError("T must be nonnegative")
    if sigma <= 0:
        raise ValueError("sigma must be positive (the floor degenerates at 0)")
    return (d / 4.0) * math.exp(-T * kappa * kappa / (4.0 * sigma * sigma))


# ---------------------------------------------------------------------------
# superefficiency
# ---------------------------------------------------------------------------

# largest admissible risk-deficiency parameter, sqrt(1/(8e))
DELTA_MAX = math.sqrt(1.0 / (8.0 * math.e))

# constant multiplying the reference modulus in the tilted-risk lower bound
LOWER_BOUND_CONSTANT = (4.0 - math.sqrt(2.0)) / 4.0


@dataclass(frozen=True)
class SuperefficiencyReport:
    function: str
    estimator: str
    delta: float
    T: int
    sigma: float
    epsilon_T: float
    modulus_scale: float
    risk_f: float
    stderr_f: float
    risk_g_plus: float
    stderr_g_plus: float
    risk_g_minus: float
    stderr_g_minus: float
    d_f_g_plus: float
    d_f_g_minus: float
    omega_ref_plus: float
    omega_ref_minus: float
    lower_constant: float = field(default=LOWER_BOUND_CONSTANT)

    @property
    def max_tilted_risk(self) -> float:
        return max(self.risk_g_plus, self.risk_g_minus)


def _estimator_risk(
    target: ConvexFunction1D,
    estimator,
    sigma: float,
    T: int,
    replicates: int,
    master_seed: int,
    key: tuple[int, ...],
) -> tuple[float, float]:
    if isinstance(estimator, ConstantEstimator):
        xl, xr = target.minimizer_set
        e = max(0.0, xl - estimator.x_hat, estimator.x_hat - xr)
        return e, 0.0
    errs = _replicate_errors(
        target.spec, target.domain, sigma, T, estimator, replicates,
        master_seed, key,
    )
    n = len(errs)
    stderr = float(np.std(errs, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(errs)), stderr


def superefficiency_experiment(
    spec: FunctionSpec,
    estimator,
    delta: float,
    T: int,
    sigma: float,
    replicates: int,
    master_seed: int,
    initial_interval: tuple[float, float] = (-2.0, 2.0),
    modulus_scale: float = 1.0,
) -> SuperefficiencyReport:
    """Measure estimator risk at a target and at its two tilted alternatives.

    The tilt size eps_T = sqrt(sigma^2 * ln(1/(8 delta^2)) / T) is the one at
    which beating the difficulty benchmark at the target by a factor delta
    forces inflated risk at one of the tilted functions.  The report carries
    the reference modulus values of the tilted functions (at
    modulus_scale * eps_T) for comparison; nothing about the bound is
    asserted, it is descriptive output.
    """
    if not 0.0 < delta < DELTA_MAX:
        raise ValueError(
            f"delta must lie in (0, {DELTA_MAX:.6f}), got {delta}"
        )
    if T < 1:
        raise ValueError("T must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    eps_t = math.sqrt(sigma * sigma * math.log(1.0 / (8.0 * delta * delta)) / T)
    f = build_function(spec, initial_interval)
    g_plus = build_function(Tilt(spec, eps_t), initial_interval)
    g_minus = build_function(Tilt(spec, -eps_t), initial_interval)

    risk_f, se_f = _estimator_risk(
        f, estimator, sigma, T, replicates, master_seed, key=(0,))
    risk_p, se_p = _estimator_risk(
        g_plus, estimator, sigma, T, replicates, master_seed, key=(1,))
    risk_m, se_m = _estimator_risk(
        g_minus, estimator, sigma, T, replicates, master_seed, key=(2,))

    ref_eps = modulus_scale * eps_t
    omega_p = modulus_numeric(g_plus, ref_eps) if ref_eps > 0 else 0.0
    omega_m = modulus_numeric(g_minus, ref_eps) if ref_eps > 0 else 0.0
    est_id = estimator.algorithm_id
    return SuperefficiencyReport(
        function=spec_id(spec),
        estimator=est_id,
        delta=delta,
        T=T,
        sigma=sigma,
        epsilon_T=eps_t,
        modulus_scale=modulus_scale,
        risk_f=risk_f,
        stderr_f=se_f,
        risk_g_plus=risk_p,
        stderr_g_plus=se_p,
        risk_g_minus=risk_m,
        stderr_g_minus=se_m,
        d_f_g_plus=pair_distance_d(f, g_plus),
        d_f_g_minus=pair_distance_d(f, g_minus),
        omega_ref_plus=omega_p,
        omega_ref_minus=omega_m,
    )
