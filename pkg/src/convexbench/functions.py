"""One-dimensional convex test functions with exact min-norm subgradients.

The catalog is a small family of closed-form convex functions (power growth,
absolute value, piecewise linear, linear tilts of any of these).  Every spec
knows its full subdifferential interval at every point, so the min-norm
subgradient selection, minimizer intervals and slope level sets are all
computed analytically.  All spec types are frozen dataclasses: immutable,
hashable, picklable.

Formulas are written once, on numpy arrays, and shared by the scalar and the
vectorized (many replicates at once) code paths, so both produce bitwise
identical values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, DomainMismatchError

__all__ = [
    "SymmetricPower",
    "AsymmetricPower",
    "Absolute",
    "PiecewiseLinear",
    "Tilt",
    "FunctionSpec",
    "GrowthProfile",
    "ConvexFunction1D",
    "build_function",
    "min_norm_subgradient",
    "err",
    "pair_distance_d",
    "pair_dissimilarity_kappa",
    "spec_id",
    "with_x_star",
]


@dataclass(frozen=True)
class SymmetricPower:
    """f(x) = |x - x_star|^k / k with k > 1."""

    k: float
    x_star: float = 0.0

    def __post_init__(self):
        if not self.k > 1.0:
            raise ValueError(f"SymmetricPower requires k > 1, got k={self.k}")


@dataclass(frozen=True)
class AsymmetricPower:
    """|u|^k_l/k_l left of x_star, |u|^k_r/k_r right of it, k_l, k_r > 1."""

    k_l: float
    k_r: float
    x_star: float = 0.0

    def __post_init__(self):
        if not (self.k_l > 1.0 and self.k_r > 1.0):
            raise ValueError(
                f"AsymmetricPower requires k_l, k_r > 1, got ({self.k_l}, {self.k_r})"
            )


@dataclass(frozen=True)
class Absolute:
    """f(x) = |x - x_star|."""

    x_star: float = 0.0


@dataclass(frozen=True)
class PiecewiseLinear:
    """Convex piecewise-linear function.

    ``slopes`` has one more entry than ``breakpoints`` and must be
    nondecreasing; slope ``slopes[i]`` applies between ``breakpoints[i-1]``
    and ``breakpoints[i]`` (extended to the left/right at the ends).
    The function is anchored to value 0 at the first breakpoint.
    """

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        sl = tuple(float(s) for s in self.slopes)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", sl)
        if len(bp) < 1:
            raise ValueError("PiecewiseLinear needs at least one breakpoint")
        if len(sl) != len(bp) + 1:
            raise ValueError("need len(slopes) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(s2 < s1 for s1, s2 in zip(sl, sl[1:])):
            raise ValueError("slopes must be nondecreasing (convexity)")


@dataclass(frozen=True)
class Tilt:
    """base(x) + eps * x."""

    base: "FunctionSpec"
    eps: float

    def __post_init__(self):
        if isinstance(self.base, Tilt):
            # collapse nested tilts so spec equality is structural
            object.__setattr__(self, "eps", self.eps + self.base.eps)
            object.__setattr__(self, "base", self.base.base)


FunctionSpec = Union[SymmetricPower, AsymmetricPower, Absolute, PiecewiseLinear, Tilt]

_XSTAR_SPECS = (SymmetricPower, AsymmetricPower, Absolute)


@dataclass(frozen=True)
class GrowthProfile:
    """Local polynomial growth f(edge +/- d) ~ lambda * d^k on each side."""

    k_l: float
    k_r: float
    lambda_l: float
    lambda_r: float

    def __post_init__(self):
        if not (self.k_l > 1.0 and self.k_r > 1.0):
            raise ValueError("growth exponents must exceed 1")
        if not (self.lambda_l > 0.0 and self.lambda_r > 0.0):
            raise ValueError("growth constants must be positive")


# ---------------------------------------------------------------------------
# core formula kernels (array-safe; scalars go through the same code)
# ---------------------------------------------------------------------------


def _resolve_x_star(spec, x_star):
    if x_star is None:
        return spec.x_star
    return x_star


def eval_spec(spec: FunctionSpec, x, x_star=None):
    """Function value; ``x`` may be a float or ndarray.

    ``x_star`` optionally overrides the spec's own minimizer location (used
    to evaluate a whole family of shifted copies at once).
    """
    if isinstance(spec, SymmetricPower):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        return np.abs(u) ** spec.k / spec.k
    if isinstance(spec, AsymmetricPower):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        au = np.abs(u)
        return np.where(u < 0, au**spec.k_l / spec.k_l, au**spec.k_r / spec.k_r)
    if isinstance(spec, Absolute):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        return np.abs(u)
    if isinstance(spec, PiecewiseLinear):
        if x_star is not None:
            raise ValueError("PiecewiseLinear has no x_star parameter")
        bp = np.asarray(spec.breakpoints)
        sl = np.asarray(spec.slopes)
        knot_vals = np.concatenate([[0.0], np.cumsum(sl[1:-1] * np.diff(bp))])
        xa = np.asarray(x)
        idx = np.searchsorted(bp, xa, side="right")  # segment index of x
        left_knot = bp[np.clip(idx - 1, 0, len(bp) - 1)]
        base_val = knot_vals[np.clip(idx - 1, 0, len(bp) - 1)]
        return base_val + sl[idx] * (xa - left_knot)
    if isinstance(spec, Tilt):
        return eval_spec(spec.base, x, x_star) + spec.eps * np.asarray(x)
    raise TypeError(f"unknown spec type {type(spec)!r}")


def subdiff_interval(spec: FunctionSpec, x, x_star=None):
    """Subdifferential [lo, hi] of the defining formula at ``x`` (array-safe)."""
    if isinstance(spec, SymmetricPower):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        v = np.sign(u) * np.abs(u) ** (spec.k - 1.0)
        return v, v
    if isinstance(spec, AsymmetricPower):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        au = np.abs(u)
        v = np.where(u < 0, -(au ** (spec.k_l - 1.0)), au ** (spec.k_r - 1.0))
        return v, v
    if isinstance(spec, Absolute):
        u = np.asarray(x) - _resolve_x_star(spec, x_star)
        lo = np.where(u > 0, 1.0, -1.0)
        hi = np.where(u < 0, -1.0, 1.0)
        return lo, hi
    if isinstance(spec, PiecewiseLinear):
        if x_star is not None:
            raise ValueError("PiecewiseLinear has no x_star parameter")
        bp = np.asarray(spec.breakpoints)
        sl = np.asarray(spec.slopes)
        xa = np.asarray(x)
        idx = np.searchsorted(bp, xa, side="left")
        safe = np.clip(idx, 0, len(bp) - 1)
        at_bp = (idx < len(bp)) & (bp[safe] == xa)
        lo = sl[idx]
        hi = sl[idx + at_bp.astype(int)]
        return lo, hi
    if isinstance(spec, Tilt):
        lo, hi = subdiff_interval(spec.base, x, x_star)
        return lo + spec.eps, hi + spec.eps
    raise TypeError(f"unknown spec type {type(spec)!r}")


def min_norm_from_interval(lo, hi):
    """Element of [lo, hi] closest to zero (array-safe)."""
    return np.where(lo > 0, lo, np.where(hi < 0, hi, 0.0))


def subgrad_spec(spec: FunctionSpec, x, x_star=None):
    """Min-norm subgradient of the formula (no domain check; array-safe)."""
    lo, hi = subdiff_interval(spec, x, x_star)
    return min_norm_from_interval(lo, hi)


def min_norm_subgradient(spec: FunctionSpec, x: float, domain=None) -> float:
    """Min-norm subgradient at a point, optionally enforcing a domain."""
    if domain is not None and not (domain[0] <= x <= domain[1]):
        raise DomainError(f"x={x} outside domain [{domain[0]}, {domain[1]}]")
    return float(subgrad_spec(spec, x))


def level_set(spec: FunctionSpec, s: float):
    """{x in R : s in subdifferential(x)} as (lo, hi), or None if empty.

    Endpoints may be +/-inf for specs that are eventually affine.
    """
    if isinstance(spec, SymmetricPower):
        u = float(np.sign(s)) * abs(s) ** (1.0 / (spec.k - 1.0))
        p = spec.x_star + u
        return (p, p)
    if isinstance(spec, AsymmetricPower):
        if s < 0:
            p = spec.x_star - abs(s) ** (1.0 / (spec.k_l - 1.0))
        elif s > 0:
            p = spec.x_star + s ** (1.0 / (spec.k_r - 1.0))
        else:
            p = spec.x_star
        return (p, p)
    if isinstance(spec, Absolute):
        if -1.0 < s < 1.0:
            return (spec.x_star, spec.x_star)
        if s == -1.0:
            return (-np.inf, spec.x_star)
        if s == 1.0:
            return (spec.x_star, np.inf)
        return None
    if isinstance(spec, PiecewiseLinear):
        sl = spec.slopes
        m = len(sl) - 1
        if s < sl[0] or s > sl[m]:
            return None
        first_ge = int(np.searchsorted(sl, s, side="left"))
        last_le = int(np.searchsorted(sl, s, side="right")) - 1
        if first_ge <= last_le:  # s attained on segments first_ge..last_le
            lo = -np.inf if first_ge == 0 else spec.breakpoints[first_ge - 1]
            hi = np.inf if last_le == m else spec.breakpoints[last_le]
            return (lo, hi)
        # s strictly between adjacent slopes: single breakpoint
        p = spec.breakpoints[last_le]
        return (p, p)
    if isinstance(spec, Tilt):
        return level_set(spec.base, s - spec.eps)
    raise TypeError(f"unknown spec type {type(spec)!r}")


def minimizer_interval(spec: FunctionSpec, domain: tuple[float, float]):
    """Argmin of the spec over the domain, as a closed interval."""
    a, b = domain
    lvl = level_set(spec, 0.0)
    if lvl is None:
        # subgradient never touches 0: the function is strictly monotone
        g_a = float(subgrad_spec(spec, a))
        return (a, a) if g_a > 0 else (b, b)
    lo, hi = lvl
    if hi < a:
        return (a, a)
    if lo > b:
        return (b, b)
    return (max(lo, a), min(hi, b))


def kinks_of(spec: FunctionSpec) -> tuple[float, ...]:
    """Points where the spec is not differentiable."""
    if isinstance(spec, Absolute):
        return (spec.x_star,)
    if isinstance(spec, PiecewiseLinear):
        return tuple(
            b
            for b, s1, s2 in zip(spec.breakpoints, spec.slopes, spec.slopes[1:])
            if s1 != s2
        )
    if isinstance(spec, Tilt):
        return kinks_of(spec.base)
    return ()


def growth_of(spec: FunctionSpec) -> GrowthProfile | None:
    """Local growth profile at the minimizer, when known in closed form."""
    if isinstance(spec, SymmetricPower):
        lam = 1.0 / spec.k
        return GrowthProfile(spec.k, spec.k, lam, lam)
    if isinstance(spec, AsymmetricPower):
        return GrowthProfile(spec.k_l, spec.k_r, 1.0 / spec.k_l, 1.0 / spec.k_r)
    return None


def strip_tilt(spec: FunctionSpec) -> tuple[FunctionSpec, float]:
    """Split a spec into (untilted core, total tilt)."""
    if isinstance(spec, Tilt):
        core, e = strip_tilt(spec.base)
        return core, e + spec.eps
    return spec, 0.0


def with_x_star(spec: FunctionSpec, v: float) -> FunctionSpec:
    """Copy of ``spec`` with its minimizer location moved to ``v``."""
    if isinstance(spec, SymmetricPower):
        return SymmetricPower(spec.k, v)
    if isinstance(spec, AsymmetricPower):
        return AsymmetricPower(spec.k_l, spec.k_r, v)
    if isinstance(spec, Absolute):
        return Absolute(v)
    if isinstance(spec, Tilt):
        return Tilt(with_x_star(spec.base, v), spec.eps)
    raise ValueError(f"{type(spec).__name__} has no x_star parameter")


def _fmt(v: float) -> str:
    return repr(float(v))


def spec_id(spec: FunctionSpec) -> str:
    """Stable human-readable identifier used in CSV output."""
    if isinstance(spec, SymmetricPower):
        return f"sym-power(k={_fmt(spec.k)};x*={_fmt(spec.x_star)})"
    if isinstance(spec, AsymmetricPower):
        return (
            f"asym-power(kl={_fmt(spec.k_l)};kr={_fmt(spec.k_r)};"
            f"x*={_fmt(spec.x_star)})"
        )
    if isinstance(spec, Absolute):
        return f"absolute(x*={_fmt(spec.x_star)})"
    if isinstance(spec, PiecewiseLinear):
        bp = " ".join(_fmt(b) for b in spec.breakpoints)
        sl = " ".join(_fmt(s) for s in spec.slopes)
        return f"piecewise-linear(bp=[{bp}];slopes=[{sl}])"
    if isinstance(spec, Tilt):
        return f"tilt({spec_id(spec.base)};eps={_fmt(spec.eps)})"
    raise TypeError(f"unknown spec type {type(spec)!r}")


# ---------------------------------------------------------------------------
# built function object
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexFunction1D:
    """A catalog spec bound to a compact domain.

    Immutable and safe to share across threads.  Queries outside the domain
    raise DomainError rather than clamping, so harness bugs surface loudly.
    """

    spec: FunctionSpec
    domain: tuple[float, float]
    minimizer_set: tuple[float, float]
    growth: GrowthProfile | None
    kinks: tuple[float, ...]

    def _check(self, x: float):
        a, b = self.domain
        if not (a <= x <= b):
            raise DomainError(f"x={x} outside domain [{a}, {b}]")

    def eval(self, x: float) -> float:
        self._check(x)
        return float(eval_spec(self.spec, x))

    def subgrad(self, x: float) -> float:
        """Min-norm subgradient; deterministic by construction."""
        self._check(x)
        return float(subgrad_spec(self.spec, x))

    def subdiff(self, x: float) -> tuple[float, float]:
        self._check(x)
        lo, hi = subdiff_interval(self.spec, x)
        return float(lo), float(hi)

    def slope_range(self) -> tuple[float, float]:
        """Range of subgradient values attained over the domain."""
        a, b = self.domain
        lo_a, _ = subdiff_interval(self.spec, a)
        _, hi_b = subdiff_interval(self.spec, b)
        return float(lo_a), float(hi_b)

    @property
    def id(self) -> str:
        return spec_id(self.spec)


def build_function(spec: FunctionSpec, domain: tuple[float, float]) -> ConvexFunction1D:
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise ValueError(f"domain must satisfy a < b, got [{a}, {b}]")
    ml, mr = minimizer_interval(spec, (a, b))
    kk = tuple(k for k in kinks_of(spec) if a <= k <= b)
    return ConvexFunction1D(
        spec=spec,
        domain=(a, b),
        minimizer_set=(float(ml), float(mr)),
        growth=growth_of(spec),
        kinks=kk,
    )


# ---------------------------------------------------------------------------
# error metric and pair dissimilarities
# ---------------------------------------------------------------------------


def err(x: float, fn: ConvexFunction1D) -> float:
    """Distance from ``x`` to the minimizer interval of ``fn``."""
    xl, xr = fn.minimizer_set
    return max(0.0, xl - x, x - xr)


def _interval_distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    return max(0.0, q[0] - p[1], p[0] - q[1])


def pair_distance_d(f: ConvexFunction1D, g: ConvexFunction1D) -> float:
    """Distance between the minimizer intervals of two functions."""
    if f.domain != g.domain:
        raise DomainMismatchError(f"domains differ: {f.domain} vs {g.domain}")
    return _interval_distance(f.minimizer_set, g.minimizer_set)


def pair_dissimilarity_kappa(
    f: ConvexFunction1D, g: ConvexFunction1D, n_grid: int = 100_000
) -> float:
    """sup over the domain of |f'(x) - g'(x)| (min-norm subgradients).

    Exact for pairs that differ only by a linear tilt; otherwise a grid
    supremum over ``n_grid`` points plus the kinks of both functions (a lower
    bound on the true supremum in general).
    """
    if f.domain != g.domain:
        raise DomainMismatchError(f"domains differ: {f.domain} vs {g.domain}")
    if n_grid < 2:
        raise ValueError("grid resolution must be positive (n_grid >= 2)")
    core_f, eps_f = strip_tilt(f.spec)
    core_g, eps_g = strip_tilt(g.spec)
    if core_f == core_g:
        return abs(eps_f - eps_g)
    a, b = f.domain
    pts = [np.linspace(a, b, n_grid)]
    # one-sided limits at kinks carry the extreme subgradient gaps
    side = 1e-9 * (b - a)
    for k in set(f.kinks) | set(g.kinks):
        pts.append(np.clip(np.array([k, k - side, k + side]), a, b))
    xs = np.concatenate(pts)
    gap = np.abs(subgrad_spec(f.spec, xs) - subgrad_spec(g.spec, xs))
    return float(np.max(gap))
