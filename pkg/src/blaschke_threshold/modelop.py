"""Finite sections of the model operator on normalized reproducing kernels.

For zeros z_1..z_N of B (disk chart) and eigenvalues t_j, the operator T acts
on span{x_j} by T x_j = t_j x_j.  With x = sum c_j x_j,
    ||x||^2 = c* G c,    ||T x||^2 = c* D* G D c,    D = diag(t),
so the extreme singular values of T on the span are the square roots of the
extreme eigenvalues of the definite pencil (D* G D, G).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .blaschke import (
    ProductSpec,
    RowSpec,
    UniformStack,
    interpolation_constant,
    row_log_modulus,
    uniform_tail_log_bounds,
)
from .construction import WitnessSet, sparse_witness_product
from .covering import c1_upper, eta_formula
from .errors import DomainError, IllConditionedGram
from .geometry import Chart, Point, cayley

RESIDUAL_TOL = 1e-10
PIVOT_TOL = 1e-14


def _gram_from_halfplane(z: np.ndarray) -> np.ndarray:
    """Disk Gram matrix of the Cayley images of half-plane points, cancellation free.

    Uses 1 - |w|^2 = 4y/|z+i|^2 and 1 - w_j conj(w_k) = -2i(z_j - conj z_k)/((z_j+i)(conj z_k - i)).
    """
    y = z.imag
    ph = (z + 1j) / np.abs(z + 1j)
    num = 2.0 * np.sqrt(np.outer(y, y)) * np.outer(ph, np.conj(ph))
    g = num * 1j / (z[:, None] - np.conj(z)[None, :])
    np.fill_diagonal(g, 1.0)
    return g


def _gram_from_disk(w: np.ndarray) -> np.ndarray:
    r = np.abs(w)
    s = np.sqrt((1.0 - r) * (1.0 + r))
    g = np.outer(s, s) / (1.0 - w[:, None] * np.conj(w)[None, :])
    np.fill_diagonal(g, 1.0)
    return g


@dataclass(frozen=True, eq=False)
class KernelSection:
    # Points in the chart they were given in.  Half-plane zeros far from i
    # have Cayley images that round onto the unit circle, so the half-plane
    # coordinates are kept and the Gram matrix is formed from them directly.
    zeros: tuple
    gram: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.gram.shape != (len(self.zeros), len(self.zeros)) or self.targets.shape != (len(self.zeros),):
            raise DomainError("gram/targets do not match the zero count")
        self.gram.setflags(write=False)
        self.targets.setflags(write=False)

    def disk_zeros(self) -> tuple:
        return tuple(p if p.chart is Chart.DISK else cayley(p) for p in self.zeros)

    @property
    def n(self) -> int:
        return len(self.zeros)

    def sub(self, indices: Sequence[int]) -> "KernelSection":
        idx = np.asarray(indices, dtype=int)
        return KernelSection(tuple(self.zeros[i] for i in idx), self.gram[np.ix_(idx, idx)].copy(), self.targets[idx].copy())

    @cached_property
    def gram_condition(self) -> float:
        ev = np.linalg.eigvalsh(self.gram)
        return float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf


def _check_distinct(z: np.ndarray) -> None:
    if len(np.unique(z)) != len(z):
        raise DomainError("duplicate zeros: the Gram matrix would be singular")


def build_section(zeros_halfplane: Sequence, targets: Sequence[complex]) -> KernelSection:
    """Section on the kernels at the Cayley images of half-plane zeros."""
    z = np.array([p.z if isinstance(p, Point) else complex(p) for p in zeros_halfplane])
    t = np.asarray(targets, dtype=complex).ravel()
    if len(t) != len(z):
        raise DomainError("one target per zero is required")
    if np.any(~(z.imag > 0)):
        raise DomainError("zeros must lie in the upper half-plane")
    _check_distinct(z)
    pts = tuple(Point.halfplane(c) for c in z)
    return KernelSection(pts, _gram_from_halfplane(z), t)


def build_disk_section(zeros_disk: Sequence, targets: Sequence[complex]) -> KernelSection:
    w = np.array([p.z if isinstance(p, Point) else complex(p) for p in zeros_disk])
    t = np.asarray(targets, dtype=complex).ravel()
    if len(t) != len(w):
        raise DomainError("one target per zero is required")
    _check_distinct(w)
    pts = tuple(Point.disk(c) for c in w)
    return KernelSection(pts, _gram_from_disk(w), t)


@dataclass(frozen=True)
class SectionSpectrum:
    sigma_min: float
    sigma_max: float
    inverse_norm: float
    gram_condition: float
    residual: float = 0.0


def _pivoted_cholesky(g: np.ndarray):
    n = g.shape[0]
    c, piv, rank, info = lapack.zpstrf(g, tol=-1.0, lower=1)
    if info < 0:
        raise ValueError(f"zpstrf argument error {info}")
    piv = piv - 1
    low = np.tril(c)
    d = np.real(np.diag(low)) ** 2
    bad = rank < n or info > 0 or np.any(d <= PIVOT_TOL * n)
    return low, piv, bad


def section_spectrum(s: KernelSection) -> SectionSpectrum:
    """Extreme singular values of T on the kernel span via the (D*GD, G) pencil."""
    n = s.n
    g = np.array(s.gram, dtype=complex)
    low, piv, bad = _pivoted_cholesky(g)
    if bad:
        raise IllConditionedGram(
            f"pivoted Cholesky of the {n}x{n} Gram matrix broke down",
            gram_condition=s.gram_condition,
            feasible_n=None,
        )
    t = s.targets[piv]
    # K = L* D L^{-*}; its singular values are sigma(T) on the span
    kh = solve_triangular(low, np.conj(t)[:, None] * low, lower=True)
    k = kh.conj().T
    u, sv, vh = np.linalg.svd(k)
    smin, smax = float(sv[-1]), float(sv[0])
    # residual of the pencil eigenpair for sigma_min
    cp = solve_triangular(low.conj().T, vh[-1].conj(), lower=False)
    c = np.empty(n, dtype=complex)
    c[piv] = cp
    gg = np.asarray(s.gram)
    dt = np.asarray(s.targets)
    r = np.conj(dt) * (gg @ (dt * c)) - smin * smin * (gg @ c)
    scale = np.linalg.norm(gg, 2) * np.linalg.norm(c) * max(1.0, float(np.max(np.abs(dt))) ** 2)
    resid = float(np.linalg.norm(r) / scale)
    if resid > RESIDUAL_TOL:
        raise IllConditionedGram(
            f"pencil residual {resid:.3e} exceeds {RESIDUAL_TOL}", gram_condition=s.gram_condition
        )
    inv = 1.0 / smin if smin > 0 else math.inf
    return SectionSpectrum(smin, smax, inv, s.gram_condition, resid)


# ----------------------------------------------------------- zero sets


def section_zeros(spec: ProductSpec, per_row: int = 1) -> list[complex]:
    """Deterministic enumeration of constructed zeros.

    Level by level; each row contributes the 2*per_row zeros closest to the
    imaginary axis; within a level zeros are sorted by |Re|, then positive
    real part first, then height.
    """
    if per_row < 1:
        raise DomainError("per_row must be >= 1")
    by_level: dict = {}
    for row, lev in zip(spec.rows, spec.row_levels):
        by_level.setdefault(lev, []).extend(row.zero(k) for k in range(-per_row, per_row))
    out = []
    for lev in sorted(by_level):
        out.extend(sorted(by_level[lev], key=lambda z: (abs(z.real), z.real < 0, z.imag)))
    return out


def witness_values(witness: WitnessSet, zeros: Sequence[complex]) -> np.ndarray:
    """f(z) = prod (z - v)/(z - conj v) over the witness points."""
    z = np.asarray(zeros, dtype=complex)
    out = np.ones(len(z), dtype=complex)
    for p in witness.v:
        out *= (z - p.z) / (z - np.conj(p.z))
    return out


def witness_targets(witness: WitnessSet, zeros: Sequence[complex]) -> np.ndarray:
    """Eigenvalues conj f(z_j) of f(M_B)* on the kernels at z_j."""
    return np.conj(witness_values(witness, zeros))


@dataclass(frozen=True)
class SweepRow:
    n: int
    sigma_min: float
    inverse_norm: float
    gram_condition: float
    sigma_max: float


def sweep_targets(sections_zeros: Sequence[complex], targets: np.ndarray, n_list: Sequence[int]) -> list[SweepRow]:
    """sigma_min of nested sections over the first N zeros for each N."""
    if list(n_list) != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise DomainError("N_list must be strictly increasing")
    if n_list and n_list[-1] > len(sections_zeros):
        raise DomainError(f"N={n_list[-1]} exceeds the {len(sections_zeros)} enumerated zeros")
    full = build_section(sections_zeros[: n_list[-1]], targets[: n_list[-1]])
    rows, feasible = [], None
    for n in n_list:
        try:
            sp = section_spectrum(full.sub(range(n)))
        except IllConditionedGram as exc:
            exc.feasible_n = feasible
            raise
        feasible = n
        rows.append(SweepRow(n, sp.sigma_min, sp.inverse_norm, sp.gram_condition, sp.sigma_max))
    return rows


def inverse_norm_sweep(spec: ProductSpec, witness: WitnessSet, n_list: Sequence[int], per_row: int = 1):
    """Finite-section sigma_min of f(M_B)* for the witness product f."""
    zeros = section_zeros(spec, per_row)
    return sweep_targets(zeros, witness_targets(witness, zeros), n_list)


def feasible_frontier(spec: ProductSpec, witness: WitnessSet, per_row: int = 1, n_max: Optional[int] = None) -> int:
    """Largest N for which the section solve succeeds (scanning upward)."""
    zeros = section_zeros(spec, per_row)
    n_max = len(zeros) if n_max is None else min(n_max, len(zeros))
    full = build_section(zeros[:n_max], witness_targets(witness, zeros[:n_max]))
    best = 0
    for n in range(1, n_max + 1):
        try:
            section_spectrum(full.sub(range(n)))
        except IllConditionedGram:
            break
        best = n
    return best


def phase_targets(witness: WitnessSet, zeros: Sequence[complex], delta: float) -> np.ndarray:
    """delta times the conjugate unimodular phase of b_v(z_j) for the nearest witness v."""
    z = np.asarray(zeros, dtype=complex)
    v = np.array([p.z for p in witness.v])
    b = (z[:, None] - v[None, :]) / (z[:, None] - np.conj(v)[None, :])
    nearest = np.argmin(np.abs(b), axis=1)
    bz = b[np.arange(len(z)), nearest]
    return delta * np.conj(bz) / np.abs(bz)


FAMILIES = ("witness", "phase", "constant")


@dataclass(frozen=True)
class DeltaRow:
    delta: float
    n: int
    family: str
    sigma_min: float
    inverse_norm: float
    eta: float
    c1_upper: float
    gram_condition: float
    sigma_max: float


def family_targets(spec: ProductSpec, witness: WitnessSet, zeros: Sequence[complex], delta: float, family: str) -> np.ndarray:
    """Target eigenvalues at level delta.

    witness:  conj f_delta(z_j), f_delta the sub-product of witness factors
              kept by the greedy thinning with |f_delta| >= delta on the zeros;
              a genuine unit-ball function, so the threshold result applies.
    phase:    delta times the conjugate phase of b_v(z_j), v the nearest
              witness; not a trace of a unit-ball function in general
              (its sigma_max is the least norm of an interpolant).
    constant: delta at every zero.
    """
    if family == "witness":
        if delta >= 1.0:
            return np.ones(len(zeros), dtype=complex)
        return witness_targets(sparse_witness_product(spec, witness, delta), zeros)
    if family == "phase":
        return phase_targets(witness, zeros, delta)
    if family == "constant":
        return np.full(len(zeros), complex(delta))
    raise DomainError(f"unknown target family {family!r}; choose from {FAMILIES}")


def delta_sweep(
    spec: ProductSpec,
    witness: WitnessSet,
    delta_list: Sequence[float],
    n,
    per_row: int = 1,
    corona_c: float = 1.0,
    families: Sequence[str] = FAMILIES,
) -> list[DeltaRow]:
    """Section inverse norms per target family next to the closed-form c1 bound.

    ``n`` is a section size or an increasing list of them.  Rows are
    ordered by delta, then family, then N.
    """
    n_list = [int(n)] if np.isscalar(n) else [int(v) for v in n]
    if n_list != sorted(set(n_list)):
        raise DomainError("N values must be strictly increasing")
    zeros = section_zeros(spec, per_row)
    if len(zeros) < n_list[-1]:
        raise DomainError(f"only {len(zeros)} zeros enumerated, N={n_list[-1]} requested")
    zeros = zeros[: n_list[-1]]
    alpha = spec.kind.alpha if hasattr(spec.kind, "alpha") else float(max(spec.alphas))
    base = build_section(zeros, np.ones(len(zeros)))
    out = []
    for delta in sorted(delta_list):
        if not 0.0 < delta <= 1.0:
            raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
        try:
            eta = eta_formula(alpha, delta)
            bound = c1_upper(eta, corona_c)
        except DomainError:
            eta, bound = math.nan, math.inf
        for fam in families:
            full = KernelSection(base.zeros, np.array(base.gram), family_targets(spec, witness, zeros, delta, fam))
            for m in n_list:
                sp = section_spectrum(full.sub(range(m)))
                out.append(DeltaRow(delta, m, fam, sp.sigma_min, sp.inverse_norm, eta, bound, sp.gram_condition, sp.sigma_max))
    return out


# ------------------------------------------------------ separation


@dataclass(frozen=True)
class SeparationReport:
    per_row: tuple  # (alpha, gamma, pi*alpha/sinh(pi*alpha))
    global_separation: float
    argmin: Optional[complex]


def _others_log_lo(spec: ProductSpec, own: int, z: complex) -> float:
    acc = 0.0
    for i, r in enumerate(spec.rows):
        if i != own:
            acc += row_log_modulus(r, Point.halfplane(z))
    lo = acc + math.log1p(-0.5e-13 * len(spec.rows))
    if isinstance(spec.kind, UniformStack):
        lo += uniform_tail_log_bounds(spec.kind, z)[0]
    return lo


def interpolation_separation(spec, per_row: int = 4) -> SeparationReport:
    """Per-row interpolation constants and the min over zeros of prod_{mu != lam} |b_mu(lam)|.

    ``spec`` is a ProductSpec (infinite rows; the product over a zero's own
    row is the closed-form constant) or a finite list of half-plane zeros.
    """
    if not isinstance(spec, ProductSpec):
        z = np.array([p.z if isinstance(p, Point) else complex(p) for p in spec])
        if len(z) == 1:
            return SeparationReport((), 1.0, complex(z[0]))
        best, arg = math.inf, None
        for j in range(len(z)):
            others = np.delete(z, j)
            val = float(np.exp(np.sum(np.log(np.abs(z[j] - others) / np.abs(z[j] - np.conj(others))))))
            if val < best:
                best, arg = val, complex(z[j])
        return SeparationReport((), best * (1.0 - 1e-13 * len(z)), arg)
    per = tuple((r.alpha, r.gamma, interpolation_constant(r.alpha)) for r in spec.rows)
    best, arg = math.inf, None
    for i, r in enumerate(spec.rows):
        own = math.log(interpolation_constant(r.alpha))
        for k in range(-per_row, per_row):
            z = r.zero(k)
            val = own + _others_log_lo(spec, i, z)
            if val < best:
                best, arg = val, z
    return SeparationReport(per, math.exp(best), arg)
