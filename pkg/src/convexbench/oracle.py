"""Budgeted, seeded Gaussian first-order oracle.

A session answers queries at points x with ``f'(x) + sigma * z`` where f' is
the function's min-norm subgradient and z is a standard normal draw from the
session's private stream.  The budget is enforced here, not trusted to the
algorithms, so query accounting in experiments is trustworthy.

Sessions are single-owner: parallel experiments use one session per
replicate, each seeded by a pure function of (master_seed, replicate index)
via ``numpy.random.SeedSequence`` spawn keys.  ``OracleBatch`` advances many
such per-replicate streams in lockstep and produces bitwise identical values
to the equivalent scalar sessions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .functions import ConvexFunction1D, FunctionSpec, subgrad_spec

__all__ = ["OracleConfig", "OracleSession", "OracleBatch", "replicate_seed"]


@dataclass(frozen=True)
class OracleConfig:
    sigma: float
    budget: int
    master_seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")


def replicate_seed(master_seed: int, *indices: int) -> np.random.SeedSequence:
    """Deterministic per-replicate seed, a pure function of its arguments."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(indices))


class OracleSession:
    """One function, one noise stream, one budget.

    Replayable: the same (seed, sequence of query points) produces the same
    sequence of returned values, bit for bit.  Not thread-safe; use one
    session per concurrent run.
    """

    def __init__(
        self,
        config: OracleConfig,
        function: ConvexFunction1D,
        seed: np.random.SeedSequence | None = None,
    ):
        self.config = config
        self.function = function
        self.queries_used = 0
        ss = seed if seed is not None else np.random.SeedSequence(config.master_seed)
        self._rng = np.random.Generator(np.random.PCG64(ss))

    def remaining_budget(self) -> int:
        return self.config.budget - self.queries_used

    def _take(self, n: int):
        if self.queries_used + n > self.config.budget:
            raise BudgetError(
                f"budget exhausted: {self.queries_used} used of "
                f"{self.config.budget}, {n} more requested"
            )

    def query(self, x: float) -> float:
        """Noisy subgradient at x; counts one query."""
        self._take(1)
        g = self.function.subgrad(x)  # raises DomainError outside the domain
        z = self._rng.standard_normal()
        self.queries_used += 1
        return g + self.config.sigma * z

    def query_block(self, x: float, n: int) -> np.ndarray:
        """n queries at the same point, identical to n query() calls."""
        self._take(n)
        g = self.function.subgrad(x)
        z = self._rng.standard_normal(n)
        self.queries_used += n
        return g + self.config.sigma * z


class OracleBatch:
    """Many independent oracle sessions advanced in lockstep.

    Replicate r answers from its own stream seeded by ``seeds[r]``; results
    are bitwise identical to running a scalar OracleSession per replicate.
    The budget applies per replicate (all replicates consume together).
    """

    def __init__(
        self,
        spec: FunctionSpec,
        x_star: np.ndarray | None,
        domain: tuple[float, float],
        sigma: float,
        budget: int,
        seeds: list[np.random.SeedSequence],
    ):
        self.spec = spec
        self.x_star = None if x_star is None else np.asarray(x_star, dtype=float)
        self.domain = (float(domain[0]), float(domain[1]))
        self.sigma = float(sigma)
        self.budget = int(budget)
        self.queries_used = 0
        self._gens = [np.random.Generator(np.random.PCG64(s)) for s in seeds]
        self.n_replicates = len(seeds)
        self._buf = None  # prefetched noise, shape (R, chunk)
        self._buf_pos = 0

    def _take(self, n: int):
        if self.queries_used + n > self.budget:
            raise BudgetError(
                f"budget exhausted: {self.queries_used} used of {self.budget}, "
                f"{n} more requested"
            )

    def _check_domain(self, x: np.ndarray):
        a, b = self.domain
        if np.any(x < a) or np.any(x > b):
            bad = x[(x < a) | (x > b)][0]
            from .errors import DomainError

            raise DomainError(f"x={bad} outside domain [{a}, {b}]")

    def _noise_columns(self, n: int) -> np.ndarray:
        """Next n noise values per replicate, in per-replicate stream order."""
        return np.stack([g.standard_normal(n) for g in self._gens], axis=0)

    def query_block_all(self, x: np.ndarray, n: int) -> np.ndarray:
        """n queries at per-replicate points x (shape (R,)); returns (R, n)."""
        self._take(n)
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        g = subgrad_spec(self.spec, x, self.x_star)
        z = self._noise_columns(n)
        self.queries_used += n
        return g[:, None] + self.sigma * z

    def begin_steps(self, n: int):
        """Prefetch noise for the next n single-point queries per replicate."""
        self._take(n)  # reserve-check only; queries still counted one by one
        self._buf = self._noise_columns(n)
        self._buf_pos = 0

    def query_all(self, x: np.ndarray) -> np.ndarray:
        """One query per replicate at points x (shape (R,)); returns (R,)."""
        self._take(1)
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        g = subgrad_spec(self.spec, x, self.x_star)
        if self._buf is not None and self._buf_pos < self._buf.shape[1]:
            z = self._buf[:, self._buf_pos]
            self._buf_pos += 1
        else:
            z = self._noise_columns(1)[:, 0]
        self.queries_used += 1
        return g + self.sigma * z
