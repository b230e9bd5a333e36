"""Periodic Blaschke rows, stacked products and their envelope bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import DomainError
from .geometry import Chart, Point

PI = math.pi
DEFAULT_TOL = 1e-9
# Relative rounding slack charged per evaluated row.
ROW_SLACK = 1e-13


def beta_of_alpha(alpha: float) -> float:
    """Row ratio (sqrt(1+a^2) - 1)/(sqrt(1+a^2) + 1) that makes strips abut."""
    s = math.sqrt(1.0 + alpha * alpha)
    # (s - 1) written as a^2/(s + 1) to keep accuracy for small alpha
    return alpha * alpha / (s + 1.0) ** 2


def strip_bounds(alpha: float) -> tuple[float, float]:
    """Bottom and top of the covered strip, in units of gamma * Im z."""
    s = math.sqrt(1.0 + alpha * alpha)
    return alpha * s / (s + 1.0), alpha * s * (s + 1.0) / (alpha * alpha)


def delta1_of_alpha(alpha: float) -> float:
    return 1.0 / math.sqrt(1.0 + 2.0 * alpha * alpha)


def alpha_of_delta1(delta1: float) -> float:
    if not 0.0 < delta1 < 1.0:
        raise DomainError(f"delta1 must lie in (0, 1), got {delta1!r}")
    return math.sqrt((1.0 / (delta1 * delta1) - 1.0) / 2.0)


@dataclass(frozen=True)
class RowSpec:
    alpha: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "gamma"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v!r}")

    def zero(self, k: int) -> complex:
        return complex(2 * k + 1, self.alpha) / self.gamma


@dataclass(frozen=True)
class UniformStack:
    alpha: float
    beta: float
    rho: float
    n_levels: int


@dataclass(frozen=True)
class AdaptiveLevel:
    n: int
    alpha_n: float
    beta_n: float
    rho_n: float
    m_n: int


@dataclass(frozen=True)
class Adaptive:
    levels: tuple
    alpha: float  # limit of the level alphas; fixes the threshold


@dataclass(frozen=True)
class FiniteRows:
    """A plain finite product of rows with no attached structure."""


Kind = Union[UniformStack, Adaptive, FiniteRows]


@dataclass(frozen=True)
class ProductSpec:
    rows: tuple
    kind: Kind = field(default_factory=FiniteRows)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise DomainError("a product needs at least one row")
        keys = {(r.alpha, r.gamma) for r in rows}
        if len(keys) != len(rows):
            raise DomainError("two rows share (alpha, gamma): zeros would repeat")

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.rows])

    @cached_property
    def gammas(self) -> np.ndarray:
        return np.array([r.gamma for r in self.rows])

    @cached_property
    def row_levels(self) -> tuple:
        """Level index of each row (rows of one level share alpha)."""
        if isinstance(self.kind, Adaptive):
            out = []
            for lev in self.kind.levels:
                out.extend([lev.n] * lev.m_n)
            return tuple(out)
        return tuple(range(len(self.rows)))

    @property
    def delta1(self) -> float:
        """Threshold 1/sqrt(1 + 2 alpha^2) carried by the construction."""
        if isinstance(self.kind, (UniformStack, Adaptive)):
            return delta1_of_alpha(self.kind.alpha)
        return delta1_of_alpha(max(r.alpha for r in self.rows))

    def is_uniform(self) -> bool:
        return isinstance(self.kind, UniformStack)


@dataclass(frozen=True)
class CertifiedValue:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise DomainError(f"bad interval [{self.lo}, {self.hi}]")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def _need_halfplane(z: Point) -> None:
    if z.chart is not Chart.HALF_PLANE or not z.im > 0:
        raise DomainError("row evaluation needs a half-plane point with Im z > 0")


def row_log_modulus(row: RowSpec, z: Point) -> float:
    _need_halfplane(z)
    return float(kernels._row_log_modulus_np(row.alpha, row.gamma, np.array([z.re]), np.array([z.im]))[0])


def row_modulus(row: RowSpec, z: Point) -> float:
    """Closed-form |B_{alpha,gamma}(z)|."""
    return math.exp(row_log_modulus(row, z))


def row_envelope(row: RowSpec, y: float) -> tuple[float, float]:
    """Bounds on |B_row(x + iy)| valid for every real x."""
    p = math.exp(-PI * row.gamma * y)
    q = math.exp(-PI * row.alpha)
    return abs(p - q) / (1.0 - p * q), (p + q) / (1.0 + p * q)


def row_zeros(row: RowSpec, k_lo: int, k_hi: int) -> list[Point]:
    if k_lo > k_hi:
        raise DomainError("need k_lo <= k_hi")
    return [Point.halfplane(row.zero(k)) for k in range(k_lo, k_hi + 1)]


def uniform_stack_spec(alpha: float, rho: float, n_levels: int) -> ProductSpec:
    if not (alpha > 0 and rho > 0 and n_levels >= 1):
        raise DomainError("need alpha > 0, rho > 0, n_levels >= 1")
    beta = beta_of_alpha(alpha)
    rows = tuple(RowSpec(alpha, rho * beta**n) for n in range(n_levels))
    return ProductSpec(rows, UniformStack(float(alpha), beta, float(rho), int(n_levels)))


def product_log_bounds(spec: ProductSpec, xs, ys, tol: float = DEFAULT_TOL):
    """Vectorized certified bounds on log|B| at points xs + i ys.

    Returns (log_lo, log_hi) arrays.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if np.any(~(ys > 0)):
        raise DomainError("product evaluation needs Im z > 0")
    if isinstance(spec.kind, UniformStack):
        k = spec.kind
        logs, tails, used = kernels.uniform_log_sum(k.alpha, k.beta, k.rho, k.n_levels, tol, xs, ys)
        assert np.all(np.isfinite(tails)), "tail bound not summable"
        slack = ROW_SLACK * np.maximum(used, 1)
        return logs - tails + np.log1p(-0.5 * slack), np.minimum(logs + np.log1p(0.5 * slack), 0.0)
    logs = kernels.log_rows_sum(spec.alphas, spec.gammas, xs, ys)
    slack = ROW_SLACK * len(spec.rows)
    return logs + math.log1p(-0.5 * slack), np.minimum(logs + math.log1p(0.5 * slack), 0.0)


def product_modulus(spec: ProductSpec, z: Point, tol: float = DEFAULT_TOL) -> CertifiedValue:
    """Interval certified to contain |B(z)|, omitted uniform tail included."""
    _need_halfplane(z)
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = product_log_bounds(spec, [z.re], [z.im], tol)
    return CertifiedValue(math.exp(lo[0]), math.exp(hi[0]))


def envelope_lower_bound(alpha: float, beta: float, rho: float, y: float) -> float:
    """exp{-(1+e^{-pi a}) pi rho y / ((e^{-pi rho y} - e^{-pi a})(1-beta))}, strip below alpha/rho."""
    if not 0.0 < y <= 0.999 * alpha / rho:
        raise DomainError(f"lower bound needs 0 < y <= 0.999*alpha/rho, got y={y!r}")
    q = math.exp(-PI * alpha)
    return math.exp(-(1.0 + q) * PI * rho * y / ((math.exp(-PI * rho * y) - q) * (1.0 - beta)))


def envelope_upper_bound(alpha: float, beta: float, rho: float, y: float) -> float:
    """(cosh pi alpha)^(-N) with N = log(rho y/alpha)/log(1/beta), above alpha/rho."""
    if not y > alpha / rho:
        raise DomainError(f"upper bound needs y > alpha/rho, got y={y!r}")
    n = math.log(rho * y / alpha) / math.log(1.0 / beta)
    return math.exp(-log_cosh(PI * alpha) * n)


def log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def interpolation_constant(alpha: float) -> float:
    """|B_{alpha,gamma}/b_{z_k}| at z_k, equal to pi*alpha/sinh(pi*alpha)."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    x = PI * alpha
    if x < 1e-4:
        return 1.0 - x * x / 6.0
    return 2.0 * x * math.exp(-x) / -math.expm1(-2.0 * x)


def rows_excluding(spec: ProductSpec, index: int) -> Sequence[RowSpec]:
    return spec.rows[:index] + spec.rows[index + 1:]


def uniform_tail_log_bounds(kind: UniformStack, z: complex, tol: float = DEFAULT_TOL):
    """Bounds (lo, hi) on log|prod_{n >= n_levels} B_{alpha, beta^n rho}(z)|."""
    acc, n = 0.0, kind.n_levels
    while True:
        tb = kernels._tail_bound(kind.alpha, kind.beta, kind.rho * kind.beta**n, z.imag)
        if tb < tol:
            break
        if n >= kind.n_levels + kernels.MAX_TAIL_ROWS:
            raise AssertionError("tail bound not summable")
        acc += row_log_modulus(RowSpec(kind.alpha, kind.rho * kind.beta**n), Point.halfplane(z))
        n += 1
    slack = ROW_SLACK * (n - kind.n_levels + 1)
    return acc - tb + math.log1p(-0.5 * slack), min(acc + math.log1p(0.5 * slack), 0.0)
