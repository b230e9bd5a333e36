"""Grid checks of the covering property and of corona-type lower bounds.

All verdicts here are grid evidence: a report states the sampled maximum,
where it was attained and the grid resolution, and claims nothing between
samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .blaschke import (
    DEFAULT_TOL,
    ProductSpec,
    RowSpec,
    delta1_of_alpha,
    product_log_bounds,
    product_modulus,
    strip_bounds,
)
from .construction import WitnessSet
from .errors import ChartMismatchError, DomainError
from .geometry import Chart, Point, inverse_cayley

PI = math.pi
# Relative slack charged per witness factor on certified |f|.
FACTOR_SLACK = 1e-13


@dataclass(frozen=True)
class GridRegion:
    re_range: tuple
    im_range: tuple
    n_re: int
    n_im: int
    log_im: bool = False

    def __post_init__(self):
        lo, hi = self.im_range
        if not 0.0 < lo <= hi:
            raise DomainError(f"need 0 < im_lo <= im_hi, got {self.im_range!r}")
        if self.re_range[0] > self.re_range[1]:
            raise DomainError("need re_lo <= re_hi")
        if self.n_re < 2 or self.n_im < 2:
            raise DomainError("a grid needs at least 2 samples per axis")

    def axes(self):
        xs = np.linspace(self.re_range[0], self.re_range[1], self.n_re)
        lo, hi = self.im_range
        ys = np.geomspace(lo, hi, self.n_im) if self.log_im else np.linspace(lo, hi, self.n_im)
        # pin the endpoints so boundary points are sampled exactly
        ys[0], ys[-1] = lo, hi
        return xs, ys

    def points(self):
        """Flat (xs, ys) in row-major order: Im outer, Re inner."""
        xs, ys = self.axes()
        return np.tile(xs, len(ys)), np.repeat(ys, len(xs))

    @property
    def resolution(self) -> float:
        """Largest pseudo-hyperbolic distance from a sample to a cell corner."""
        xs, ys = self.axes()
        dx = (xs[-1] - xs[0]) / (len(xs) - 1)
        dy = np.diff(ys)
        lo = ys[:-1]
        # half-plane distance between (0, y) and (dx, y + dy)
        d = np.hypot(dx, dy) / np.hypot(dx, 2.0 * lo + dy)
        return float(np.max(d))


@dataclass(frozen=True)
class CoveringReport:
    passed: bool
    epsilon: float
    max_min_dist: float
    worst: complex
    resolution: float
    n_points: int
    # (re, im, min_dist) of the largest sampled minimum distances, worst first
    top: tuple = field(default=(), repr=False)

    def csv_rows(self):
        return [(re, im, d, d < self.epsilon) for re, im, d in self.top]


def _report(xs, ys, dist, epsilon, resolution, top_k) -> CoveringReport:
    k = min(top_k, len(dist))
    idx = np.argsort(-dist, kind="stable")[:k]
    i = int(idx[0])
    top = tuple((float(xs[j]), float(ys[j]), float(dist[j])) for j in idx)
    worst = float(dist[i])
    return CoveringReport(worst < epsilon, float(epsilon), worst, complex(xs[i], ys[i]), resolution, len(dist), top)


def strip_region(row: RowSpec, n_re: int, n_im: int, half_period: bool = False, log_im: bool = False) -> GridRegion:
    """Grid over the covered strip of a row, Re z within 1/gamma of Re z_0."""
    lo, hi = strip_bounds(row.alpha)
    x0 = 1.0 / row.gamma
    re = (x0 - 1.0 / row.gamma, x0) if half_period else (x0 - 1.0 / row.gamma, x0 + 1.0 / row.gamma)
    return GridRegion(re, (lo / row.gamma, hi / row.gamma), n_re, n_im, log_im)


def verify_strip_covering(row: RowSpec, epsilon: float, grid_density=1000, top_k: int = 16) -> CoveringReport:
    """Max over a period of the strip of the distance to the nearest zero of the row.

    ``grid_density`` is a sample count per axis or an (n_re, n_im) pair.
    """
    n_re, n_im = (grid_density, grid_density) if np.isscalar(grid_density) else grid_density
    g = strip_region(row, int(n_re), int(n_im))
    xs, ys = g.points()
    dist = kernels.min_dist_rows([row.alpha], [row.gamma], xs, ys)
    return _report(xs, ys, dist, epsilon, g.resolution, top_k)


def halfplane_grids(spec: ProductSpec, n_re: int, n_im: int, log_im: bool = True) -> list[GridRegion]:
    """One grid per row strip, Re z over half a period of that row."""
    return [strip_region(r, n_re, n_im, half_period=True, log_im=log_im) for r in spec.rows]


def _grid_points(grid) -> tuple:
    """Flatten a GridRegion, a list of them, or an array of complex points."""
    if isinstance(grid, GridRegion):
        xs, ys = grid.points()
        return xs, ys, grid.resolution
    if isinstance(grid, (list, tuple)) and grid and isinstance(grid[0], GridRegion):
        parts = [g.points() for g in grid]
        return (
            np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]),
            max(g.resolution for g in grid),
        )
    z = np.asarray([p.z if isinstance(p, Point) else complex(p) for p in np.ravel(grid)], dtype=complex)
    return z.real.copy(), z.imag.copy(), math.nan


def verify_halfplane_covering(spec: ProductSpec, epsilon: float, grid=(400, 400), top_k: int = 16) -> CoveringReport:
    """Covering of the union of row strips by the zeros of all constructed rows.

    ``grid`` is an (n_re, n_im) density per strip, a GridRegion, or a list of them.
    """
    if isinstance(grid, tuple) and len(grid) == 2 and all(isinstance(v, (int, np.integer)) for v in grid):
        grid = halfplane_grids(spec, int(grid[0]), int(grid[1]))
    xs, ys, res = _grid_points(grid)
    dist = kernels.min_dist_rows(spec.alphas, spec.gammas, xs, ys)
    return _report(xs, ys, dist, epsilon, res, top_k)


def verify_rowwise_covering(spec: ProductSpec, offset: float, grid=(400, 400), top_k: int = 16):
    """Each row strip checked at its own threshold 1/sqrt(1+2 alpha_row^2) + offset.

    For a uniform stack this is verify_halfplane_covering at delta1 + offset.
    The report's epsilon is the largest threshold used; ``passed`` requires
    every strip to pass, and the worst point is the one with the smallest
    margin.
    """
    n_re, n_im = grid
    xs_all, ys_all, d_all, m_all = [], [], [], []
    res = 0.0
    for r, g in zip(spec.rows, halfplane_grids(spec, int(n_re), int(n_im))):
        xs, ys = g.points()
        d = kernels.min_dist_rows(spec.alphas, spec.gammas, xs, ys)
        eps = delta1_of_alpha(r.alpha) + offset
        xs_all.append(xs)
        ys_all.append(ys)
        d_all.append(d)
        m_all.append(d - eps)
        res = max(res, g.resolution)
    xs, ys, d, margin = (np.concatenate(a) for a in (xs_all, ys_all, d_all, m_all))
    k = min(top_k, len(d))
    idx = np.argsort(-margin, kind="stable")[:k]
    i = int(idx[0])
    eps_max = max(delta1_of_alpha(r.alpha) for r in spec.rows) + offset
    top = tuple((float(xs[j]), float(ys[j]), float(d[j])) for j in idx)
    rep = CoveringReport(bool(margin[i] < 0.0), eps_max, float(d[i]), complex(xs[i], ys[i]), res, len(d), top)
    return rep, margin[idx]


def exceptional_points(row: RowSpec, m_range=range(-1, 2)) -> list[complex]:
    """Points of the strip boundary at distance exactly 1/sqrt(1+2 alpha^2) from the zeros."""
    lo, hi = strip_bounds(row.alpha)
    return [complex(2 * m, h) / row.gamma for m in m_range for h in (lo, hi)]


# ------------------------------------------------------------- corona


def _f_points(f) -> np.ndarray:
    if isinstance(f, WitnessSet):
        return np.array([p.z for p in f.v], dtype=complex)
    return np.array([p.z if isinstance(p, Point) else complex(p) for p in f], dtype=complex)


def f_log_bounds(f, xs, ys):
    """Certified (lo, hi) of log|f| for f the half-plane Blaschke product with zeros ``f``."""
    v = _f_points(f)
    if len(v) == 0:
        z = np.zeros(len(np.ravel(xs)))
        return z, z
    logs = kernels.log_factor_sum(v.real, v.imag, xs, ys)
    slack = FACTOR_SLACK * len(v)
    return logs + math.log1p(-slack), np.minimum(logs + math.log1p(slack), 0.0)


@dataclass(frozen=True)
class CoronaReport:
    eta: float
    argmin: complex


def corona_eta(f, spec: ProductSpec, grid, tol: float = DEFAULT_TOL) -> CoronaReport:
    """Grid minimum of certified lower ends of |f| + |B|."""
    xs, ys, _ = _grid_points(grid)
    f_lo, _ = f_log_bounds(f, xs, ys)
    b_lo, _ = product_log_bounds(spec, xs, ys, tol)
    vals = np.exp(f_lo) + np.exp(b_lo)
    i = int(np.argmin(vals))
    return CoronaReport(float(vals[i]), complex(xs[i], ys[i]))


def schwarz_lower_bound(delta: float, epsilon: float) -> float:
    """(delta - eps)/(1 - delta*eps): |f| at pseudo distance < eps from a point where |f| >= delta."""
    if not 0.0 <= epsilon < delta <= 1.0:
        raise DomainError("need 0 <= epsilon < delta <= 1")
    return (delta - epsilon) / (1.0 - delta * epsilon)


def eta_formula(alpha: float, delta: float) -> float:
    """Closed-form lower bound for inf(|f| + |B|) over the adaptive stack."""
    d1 = delta1_of_alpha(alpha)
    if not d1 < delta <= 1.0:
        raise DomainError(f"delta must lie in ({d1}, 1], got {delta!r}")
    return min(eta_first_term(alpha), (delta - d1) / (1.0 - delta * d1))


def eta_first_term(alpha: float) -> float:
    s = math.sqrt(1.0 + alpha * alpha)
    return math.exp(-alpha * s * (math.exp(PI * alpha) + 1.0) / (2.0 * (math.exp(PI * alpha / (s + 1.0)) + 1.0)))


def c1_upper(eta: float, corona_c: float = 1.0) -> float:
    """corona_c / eta^2 * log(1/eta)."""
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")
    if not corona_c > 0:
        raise DomainError("corona_c must be positive")
    return corona_c / (eta * eta) * -math.log(eta)


@dataclass(frozen=True)
class C1Estimate:
    delta: float
    eta: float
    lower: float
    upper: float
    corona_c: float
    branch: str  # "distance" when (delta - delta1)/(1 - delta*delta1) is the smaller term

    @property
    def consistent(self) -> bool:
        """lower <= upper; only guaranteed when corona_c >= eta/(-log eta)."""
        return self.lower <= self.upper


def c1_estimate(alpha: float, delta: float, corona_c: float = 1.0) -> C1Estimate:
    """Two-sided estimate of the inverse-norm bound at level delta.

    The upper end takes the smaller branch of the closed-form eta, so it is
    max of the distance branch bound and the alpha-only constant.
    """
    eta = eta_formula(alpha, delta)
    first = eta_first_term(alpha)
    branch = "constant" if eta == first else "distance"
    upper = c1_upper(eta, corona_c) if eta < 1.0 else 0.0
    return C1Estimate(float(delta), eta, 1.0 / eta, upper, float(corona_c), branch)


# ---------------------------------------------------------------- GMN


@dataclass(frozen=True)
class GmnReport:
    eta: float  # +inf when no grid point qualifies
    argmin: Optional[complex]
    n_qualifying: int


def gmn_eta_of_epsilon(spec: ProductSpec, epsilon: float, grid, tol: float = DEFAULT_TOL) -> GmnReport:
    """Min of certified |B| over grid points at distance >= epsilon from every constructed zero.

    This is a grid estimator of one side of the GMN eta(epsilon): small
    values certify that |B| <= eta does not force proximity to the zeros.
    """
    xs, ys, _ = _grid_points(grid)
    dist = kernels.min_dist_rows(spec.alphas, spec.gammas, xs, ys)
    keep = dist >= epsilon
    if not keep.any():
        return GmnReport(math.inf, None, 0)
    lo, _ = product_log_bounds(spec, xs[keep], ys[keep], tol)
    i = int(np.argmin(lo))
    return GmnReport(float(math.exp(lo[i])), complex(xs[keep][i], ys[keep][i]), int(keep.sum()))


def _row_wep(row: RowSpec, z: complex) -> float:
    """Sum over the zeros of one row of 1 - |b_{z_k}(z)|^2 (half-plane)."""
    x, y = z.real, z.imag
    yk = row.alpha / row.gamma
    big_y = y + yk
    a = PI * row.gamma * big_y
    u = row.gamma * (x - 1.0 / row.gamma)
    c = math.cos(PI * (u - 2.0 * math.floor(0.5 * u)))
    # sinh(a)/(cosh(a) - c), computed without overflow
    e = math.exp(-a)
    ratio = (1.0 - e * e) / (1.0 + e * e - 2.0 * c * e)
    return 4.0 * y * yk * (PI * row.gamma / (2.0 * big_y)) * ratio


def wep_sum(zeros, z: Point) -> float:
    """Sum over zeros of (1-|l|^2)(1-|z|^2)/|1 - conj(l) z|^2, z in the disk.

    ``zeros`` is a list of disk points or a ProductSpec (all constructed
    zeros, summed row by row in closed form).
    """
    if z.chart is not Chart.DISK:
        raise ChartMismatchError("wep_sum takes a disk point")
    if isinstance(zeros, ProductSpec):
        zh = inverse_cayley(z).z
        return math.fsum(_row_wep(r, zh) for r in zeros.rows)
    w = z.z
    rz = abs(w)
    terms = []
    for lam in zeros:
        if lam.chart is not Chart.DISK:
            raise ChartMismatchError("wep_sum zero list must be in the disk chart")
        l, rl = lam.z, abs(lam.z)
        terms.append((1.0 - rl) * (1.0 + rl) * (1.0 - rz) * (1.0 + rz) / abs(1.0 - l.conjugate() * w) ** 2)
    return math.fsum(terms)


def divergence_witness(spec: ProductSpec, witness: WitnessSet, n: int, tol: float = DEFAULT_TOL) -> float:
    """Lower bound 1/|B(v_n)| - 1 on the norm of any Bezout solution with f = b_{v_n}."""
    if not 0 <= n < len(witness.v):
        raise DomainError(f"witness index {n} outside 0..{len(witness.v) - 1}")
    val = product_modulus(spec, witness.v[n], tol)
    if val.lo == 0.0:
        return math.inf
    return 1.0 / val.hi - 1.0
