"""Optimization algorithms driven by the noisy first-order oracle.

Two algorithms: a sign-testing binary search that averages a block of noisy
derivative readings at the interval midpoint each round, and projected
stochastic gradient descent with 1/t or 1/sqrt(t) step sizes.

The binary search stores its interval as (left endpoint, width) and halves
the width each round with an exact multiply by 0.5, so the width after round
e equals 2^-e times the initial width bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ScheduleError
from .functions import ConvexFunction1D
from .modulus import DEFAULT_BISECTION_TOL, flat_set
from .oracle import OracleSession

__all__ = [
    "BinarySearchParams",
    "SgdParams",
    "RoundRecord",
    "RunResult",
    "epochs_schedule",
    "sign_test_binary_search",
    "flat_set_diagnostics",
    "sgd",
    "UNIFORM_START",
]

# sentinel for "draw the SGD starting point uniformly over the projection
# interval"; resolved by the experiment harness, never inside sgd() itself
UNIFORM_START = "uniform"


@dataclass(frozen=True)
class BinarySearchParams:
    r: float
    initial_interval: tuple[float, float]
    delta: float = 0.05  # failure probability used by the diagnostics

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"r must be positive, got {self.r}")
        a0, b0 = self.initial_interval
        if not a0 < b0:
            raise ValueError(f"need a0 < b0, got ({a0}, {b0})")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")


@dataclass(frozen=True)
class SgdParams:
    schedule: str  # "1/t" or "1/sqrt(t)"
    projection_interval: tuple[float, float]
    scale: float = 1.0
    x0: float | str = UNIFORM_START
    iterate: str = "last"  # "last" or "average"

    def __post_init__(self):
        if self.schedule not in ("1/t", "1/sqrt(t)"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.iterate not in ("last", "average"):
            raise ValueError(f"iterate must be 'last' or 'average', got {self.iterate!r}")
        a, b = self.projection_interval
        if not a < b:
            raise ValueError(f"need a < b in projection interval, got ({a}, {b})")

    def with_x0(self, x0: float) -> "SgdParams":
        return replace(self, x0=float(x0))


@dataclass(frozen=True)
class RoundRecord:
    round: int
    query_point: float
    mean_gradient: float
    interval: tuple[float, float]  # after this round's update
    width: float


@dataclass(frozen=True)
class RunResult:
    estimate: float
    queries_used: int
    trace: tuple[RoundRecord, ...] = ()


def epochs_schedule(T: int, r: float) -> tuple[int, int]:
    """Split a budget of T queries into E rounds of T0 queries each.

    E = floor(r * ln T), T0 = floor(T / E).  Natural logarithm; r absorbs the
    base.  Raises ScheduleError when T is too small for this r.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    E = math.floor(r * math.log(T))
    if E < 1:
        raise ScheduleError(f"floor(r*ln T) = 0 for T={T}, r={r}: budget too small")
    T0 = T // E
    if T0 < 1:
        raise ScheduleError(f"T0 = floor(T/E) = 0 for T={T}, E={E}")
    return E, T0


def sign_test_binary_search(
    session: OracleSession, params: BinarySearchParams
) -> RunResult:
    """E rounds of bisection steered by the sign of an averaged derivative.

    Each round queries the midpoint of the current interval T0 times, keeps
    the left half when the average reading is positive and the right half
    otherwise (ties go right).  Returns the midpoint of the final interval;
    the trace records one entry per round.
    """
    T = session.config.budget
    E, T0 = epochs_schedule(T, params.r)
    a, b0 = params.initial_interval
    width = b0 - a
    trace = []
    for e in range(1, E + 1):
        x_e = a + 0.5 * width
        block = session.query_block(x_e, T0)
        z_bar = float(np.mean(block))
        width = width * 0.5  # exact
        if z_bar > 0:
            pass  # keep left half: a unchanged
        else:
            a = x_e  # keep right half
        trace.append(
            RoundRecord(
                round=e,
                query_point=x_e,
                mean_gradient=z_bar,
                interval=(a, a + width),
                width=width,
            )
        )
    return RunResult(estimate=a + 0.5 * width, queries_used=E * T0, trace=tuple(trace))


def flat_set_diagnostics(
    f: ConvexFunction1D,
    T: int,
    r: float,
    delta: float,
    sigma: float,
    initial_interval: tuple[float, float] | None = None,
    tol: float = DEFAULT_BISECTION_TOL,
) -> tuple[float, tuple[float, float], float]:
    """Quantities governing where the binary search lands.

    Returns (C_delta, I_delta, radius_bound): the noise-deviation constant
    C_delta = sigma * sqrt(2 ln(E/delta)), the interval I_delta where the
    subgradient magnitude is below C_delta/sqrt(T0), and the bisection
    resolution 2^-E times the initial interval width.  With probability at
    least 1 - delta the search output lies within radius_bound of I_delta
    whenever the initial interval meets it.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    E, T0 = epochs_schedule(T, r)
    c_delta = sigma * math.sqrt(2.0 * math.log(E / delta))
    threshold = c_delta / math.sqrt(T0)
    if threshold > 0:
        i_delta = flat_set(f, threshold, tol)
    else:  # sigma = 0 or delta -> 1 with E = 1: the flat set degenerates
        xl, xr = f.minimizer_set
        i_delta = (xl, xr)
    a0, b0 = initial_interval if initial_interval is not None else f.domain
    radius_bound = (b0 - a0) * 0.5**E
    return c_delta, i_delta, radius_bound


def sgd(
    session: OracleSession,
    params: SgdParams,
    record_trace: bool = False,
) -> RunResult:
    """Projected stochastic gradient descent using the whole oracle budget.

    Step t (starting at 1) queries the current iterate and moves against the
    returned noisy subgradient with step size scale/t or scale/sqrt(t).
    Iterates are projected onto the projection interval before every query.
    Returns the last iterate, or the running average of the query points
    when params.iterate == "average".
    """
    if not isinstance(params.x0, (int, float)):
        raise ValueError(
            "params.x0 must be a number before calling sgd(); draw the uniform "
            "start in the harness and use params.with_x0(...)"
        )
    T = session.config.budget
    lo, hi = params.projection_interval
    c = params.scale
    inv_t = params.schedule == "1/t"
    x = min(max(float(params.x0), lo), hi)
    total = 0.0
    trace = []
    for t in range(1, T + 1):
        x_query = x
        v = session.query(x_query)
        total += x_query
        eta = c / t if inv_t else c / math.sqrt(t)
        x = x_query - eta * v
        x = min(max(x, lo), hi)
        if record_trace:
            trace.append(
                RoundRecord(
                    round=t, query_point=x_query, mean_gradient=v,
                    interval=(lo, hi), width=hi - lo,
                )
            )
    estimate = total / T if params.iterate == "average" else x
    return RunResult(estimate=estimate, queries_used=T, trace=tuple(trace))
