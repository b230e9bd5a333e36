"""Points, charts and the pseudohyperbolic metric.

Two charts are supported: the open upper half-plane and the open unit disk.
Everything downstream only needs moduli of Blaschke factors, which are
pseudohyperbolic distances, so no unimodular normalizations appear here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartMismatchError, DomainError

# Points closer than this to the boundary are rejected.
BOUNDARY_EPS = 1e-300


class Chart(enum.Enum):
    HALF_PLANE = "halfplane"
    DISK = "disk"


@dataclass(frozen=True)
class Point:
    re: float
    im: float
    chart: Chart = Chart.HALF_PLANE

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise DomainError(f"non-finite point ({re}, {im})")
        if self.chart is Chart.HALF_PLANE:
            if not im > BOUNDARY_EPS:
                raise DomainError(f"half-plane point needs Im z > 0, got {im!r}")
        elif self.chart is Chart.DISK:
            if not 1.0 - math.hypot(re, im) > BOUNDARY_EPS:
                raise DomainError(f"disk point needs |z| < 1, got |z|={math.hypot(re, im)!r}")
        else:
            raise DomainError(f"unknown chart {self.chart!r}")

    @classmethod
    def halfplane(cls, z: complex) -> "Point":
        return cls(z.real, z.imag, Chart.HALF_PLANE)

    @classmethod
    def disk(cls, z: complex) -> "Point":
        return cls(z.real, z.imag, Chart.DISK)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle in the half-plane chart."""

    re_center: float
    re_half_width: float
    im_low: float
    im_high: float

    def __post_init__(self):
        if self.re_half_width < 0:
            raise DomainError("negative half width")
        if not 0 < self.im_low <= self.im_high:
            raise DomainError("need 0 < im_low <= im_high")

    def vertices(self) -> list[Point]:
        c, w = self.re_center, self.re_half_width
        return [Point(c + sx * w, y) for y in (self.im_low, self.im_high) for sx in (-1.0, 1.0)]

    def sample(self, n_re: int, n_im: int) -> np.ndarray:
        """Complex array (n_im, n_re) of grid points, boundary included."""
        xs = np.linspace(self.re_center - self.re_half_width, self.re_center + self.re_half_width, n_re)
        ys = np.linspace(self.im_low, self.im_high, n_im)
        return xs[None, :] + 1j * ys[:, None]


def _check_charts(z: Point, w: Point) -> None:
    if z.chart is not w.chart:
        raise ChartMismatchError(f"points in different charts: {z.chart.value} vs {w.chart.value}")


def _one_minus_dist2(z: complex, w: complex, chart: Chart) -> float:
    """1 - pseudo_dist(z, w)**2 in a cancellation-free form."""
    if chart is Chart.HALF_PLANE:
        return 4.0 * z.imag * w.imag / abs(z - w.conjugate()) ** 2
    rz, rw = abs(z), abs(w)
    return (1.0 - rz) * (1.0 + rz) * (1.0 - rw) * (1.0 + rw) / abs(1.0 - w.conjugate() * z) ** 2


def pseudo_dist(z: Point, w: Point) -> float:
    """Pseudohyperbolic distance |b_w(z)| between two points of one chart."""
    _check_charts(z, w)
    a, b = z.z, w.z
    if z.chart is Chart.HALF_PLANE:
        return abs(a - b) / abs(a - b.conjugate())
    return abs(a - b) / abs(1.0 - b.conjugate() * a)


def log_blaschke_factor(z: Point, lam: Point) -> float:
    """log |b_lam(z)|, accurate both near 0 and near distance 1.

    Returns ``-inf`` when ``z == lam``.
    """
    _check_charts(z, lam)
    a, b = z.z, lam.z
    if a == b:
        return -math.inf
    s = _one_minus_dist2(a, b, z.chart)
    if s < 0.5:
        return 0.5 * math.log1p(-s)
    return math.log(pseudo_dist(z, lam))


def cayley(z: Point) -> Point:
    """Half-plane to disk: z -> (z - i)/(z + i)."""
    if z.chart is not Chart.HALF_PLANE:
        raise ChartMismatchError("cayley expects a half-plane point")
    a = z.z
    return Point.disk((a - 1j) / (a + 1j))


def inverse_cayley(w: Point) -> Point:
    """Disk to half-plane: w -> i(1 + w)/(1 - w)."""
    if w.chart is not Chart.DISK:
        raise ChartMismatchError("inverse_cayley expects a disk point")
    a = w.z
    return Point.halfplane(1j * (1.0 + a) / (1.0 - a))


def level_rectangle(lam: Point, eps: float) -> Rectangle:
    """Largest axis-aligned rectangle inscribed in {z : |b_lam(z)| <= eps}."""
    if lam.chart is not Chart.HALF_PLANE:
        raise ChartMismatchError("rectangle is defined in the half-plane chart")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    s = math.sqrt(1.0 + eps * eps)
    t = math.sqrt(2.0) * eps
    return Rectangle(
        re_center=lam.re,
        re_half_width=lam.im * t / math.sqrt((1.0 - eps) * (1.0 + eps)),
        im_low=lam.im * s / (s + t),
        im_high=lam.im * s / (s - t),
    )


def pseudo_dist_array(z: np.ndarray, w: complex) -> np.ndarray:
    """Vectorized half-plane pseudo distance from each entry of ``z`` to ``w``."""
    return np.abs(z - w) / np.abs(z - np.conj(w))
