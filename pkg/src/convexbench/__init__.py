"""convexbench: noisy first-order optimization lab for 1-D convex functions.

Catalog of closed-form convex test functions, a budgeted seeded Gaussian
subgradient oracle, difficulty moduli (analytic and numeric), a sign-testing
binary search with flat-set diagnostics, projected SGD baselines, and a
deterministic Monte-Carlo risk harness with risk-floor and superefficiency
experiments.
"""

from .algorithms import (
    BinarySearchParams,
    RoundRecord,
    RunResult,
    SgdParams,
    UNIFORM_START,
    epochs_schedule,
    flat_set_diagnostics,
    sgd,
    sign_test_binary_search,
)
from .errors import (
    BudgetError,
    DataError,
    DomainError,
    DomainMismatchError,
    ScheduleError,
    SlopeRangeError,
    UnsupportedSpecError,
)
from .experiments import (
    BinarySearchSpec,
    ConstantEstimator,
    DELTA_MAX,
    ExperimentConfig,
    FunctionFamily,
    RiskRow,
    RiskTable,
    SgdSpec,
    SlopeFit,
    SuperefficiencyReport,
    UniformDist,
    estimate_risk,
    fit_loglog_slope,
    function_id,
    superefficiency_experiment,
    two_point_floor,
)
from .functions import (
    Absolute,
    AsymmetricPower,
    ConvexFunction1D,
    FunctionSpec,
    GrowthProfile,
    PiecewiseLinear,
    SymmetricPower,
    Tilt,
    build_function,
    err,
    min_norm_subgradient,
    pair_dissimilarity_kappa,
    pair_distance_d,
    spec_id,
    with_x_star,
)
from .modulus import (
    DEFAULT_BISECTION_TOL,
    ModulusCurve,
    ModulusSample,
    big_H,
    conjugate_subdifferential,
    fit_growth_exponent,
    flat_set,
    modulus_analytic,
    modulus_bounds_from_growth,
    modulus_numeric,
    sample_modulus_curve,
)
from .oracle import OracleBatch, OracleConfig, OracleSession, replicate_seed

__version__ = "0.1.0"
