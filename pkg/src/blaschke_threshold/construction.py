"""Zero-set constructions: the uniform stack and the adaptive stack.

The uniform stack stacks rows (alpha, beta^n rho) whose covered strips abut
exactly.  The adaptive stack lets alpha_n increase towards alpha and inserts
m_n rows per level, with m_n chosen as the smallest count that satisfies
the separation conditions between consecutive witness points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .blaschke import (
    Adaptive,
    AdaptiveLevel,
    ProductSpec,
    RowSpec,
    alpha_of_delta1,
    beta_of_alpha,
    delta1_of_alpha,
    strip_bounds,
    uniform_stack_spec,
)
from .errors import ConstructionError, DomainError
from .geometry import Point

# Relative margin the computed value must clear in every condition check.
CHECK_TOL = 1e-10
MAX_M = 2**20
FLOAT_RANGE = "float-range"

AlphaSchedule = Union[Callable[[int], float], Sequence[float]]


@dataclass(frozen=True)
class ThresholdTarget:
    delta1: float
    alpha: float

    @classmethod
    def from_delta1(cls, delta1: float) -> "ThresholdTarget":
        return cls(float(delta1), alpha_of_delta1(delta1))

    @classmethod
    def from_alpha(cls, alpha: float) -> "ThresholdTarget":
        if not alpha > 0:
            raise DomainError("alpha must be positive")
        return cls(delta1_of_alpha(alpha), float(alpha))


@dataclass(frozen=True)
class WitnessSet:
    """Witness points v_n on the imaginary axis; also the zeros of f."""

    v: tuple

    def __post_init__(self):
        heights = [p.im for p in self.v]
        if any(p.re != 0.0 for p in self.v):
            raise DomainError("witness points must lie on the imaginary axis")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise DomainError("witness points must increase in modulus")

    @property
    def f_zeros(self) -> tuple:
        return self.v

    @property
    def heights(self) -> np.ndarray:
        return np.array([p.im for p in self.v])

    def subset(self, indices) -> "WitnessSet":
        return WitnessSet(tuple(self.v[i] for i in indices))


def _lower_witness_height(alpha: float) -> float:
    """gamma * Im of the witness below a row: bottom of its strip."""
    return strip_bounds(alpha)[0]


def uniform_stack(alpha: float, rho: float = 1.0, n_levels: int = 8):
    """Rows (alpha, beta^n rho), n < n_levels, with witnesses v_0..v_{n_levels}."""
    spec = uniform_stack_spec(alpha, rho, n_levels)
    beta = spec.kind.beta
    c = _lower_witness_height(alpha)
    v = tuple(Point(0.0, c / (rho * beta**n)) for n in range(n_levels + 1))
    return spec, WitnessSet(v)


def default_schedule(alpha: float) -> Callable[[int], float]:
    """alpha_n = alpha * n/(n+1): increasing, bounded, with limit alpha."""
    return lambda n: alpha * n / (n + 1.0)


def _schedule_fn(alpha_seq: Optional[AlphaSchedule], alpha: float) -> Callable[[int], float]:
    if alpha_seq is None:
        return default_schedule(alpha)
    if callable(alpha_seq):
        return alpha_seq
    seq = list(alpha_seq)

    def fn(n):
        if n - 1 >= len(seq):
            raise DomainError(f"alpha schedule has no entry for level {n}")
        return seq[n - 1]

    return fn


def _bdist(a: complex, b: complex) -> float:
    return abs(a - b) / abs(a - b.conjugate())


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the level conditions for one candidate m_n."""

    ok: bool
    violated: Optional[str]
    slack: float  # min over all checks of (lower end - required), can be < 0


def level_conditions(
    n: int,
    m: int,
    alpha_n: float,
    rho_n: float,
    alpha_next: float,
    prev_v: Sequence[float],
    alpha_of: Callable[[int], float],
    delta: float,
) -> ConditionReport:
    """Check (dist), (dop1), (dop2) and (2terms) for level n with m rows.

    ``prev_v`` holds the heights of v_0..v_{n-1}.
    """
    s = math.sqrt(1.0 + alpha_n * alpha_n)
    beta_n = beta_of_alpha(alpha_n)
    scale = rho_n * beta_n ** (m - 1)
    if not scale > 0.0 or not math.isfinite(alpha_n * s / (s - 1.0) / scale):
        return ConditionReport(False, FLOAT_RANGE, -math.inf)
    vn = alpha_n * s / (s - 1.0) / scale
    heights = list(prev_v) + [vn]
    checks = []

    def need(name, value, required):
        slack = value * (1.0 - CHECK_TOL) - required
        # overflow at huge m gives nan, which must count as a violation
        checks.append((name, slack if slack == slack else -math.inf))

    # (dist): pairs (l, k), exponent 2^-k, base uses alpha_{l+1}
    for l in range(n + 1):
        for k in range(n + 1):
            if k == l or (k != n and l != n):
                continue
            d = abs(heights[l] - heights[k]) / (heights[l] + heights[k])
            base = delta * math.sqrt(1.0 + 2.0 * (alpha_next if l == n else alpha_of(l + 1)) ** 2)
            need(f"dist(l={l},k={k})", d, base ** (2.0**-k))

    base_n = (delta * math.sqrt(1.0 + 2.0 * alpha_n * alpha_n)) ** (3.0 * 2.0**-n)
    v_prev, v_cur = 1j * heights[n - 1], 1j * vn
    lam_first = complex(1.0, alpha_n) / rho_n
    lam_last = complex(1.0, alpha_n) / (rho_n * beta_n ** (m - 1))
    need("dop1", _bdist(lam_first, v_cur), base_n)
    need("dop2", _bdist(lam_last, v_prev), base_n)
    bound2 = base_n / math.sqrt(1.0 + 2.0 * alpha_n * alpha_n)
    with np.errstate(over="ignore", invalid="ignore"):
        t = complex(1.0, alpha_n) / (rho_n * beta_n ** np.arange(m))
        two = np.abs(t - v_prev) / np.abs(t - np.conj(v_prev)) * np.abs(t - v_cur) / np.abs(t - np.conj(v_cur))
    worst = int(np.argmin(two))
    need(f"2terms(m={worst})", float(two[worst]), bound2)

    name, slack = min(checks, key=lambda c: c[1])
    if slack >= 0.0:
        return ConditionReport(True, None, slack)
    bad = next(c[0] for c in checks if c[1] < 0.0)
    return ConditionReport(False, bad, slack)


def _smallest_m(check: Callable[[int], ConditionReport]) -> int:
    """Doubling then bisection for the smallest m with check(m).ok."""
    if check(1).ok:
        return 1
    lo, hi = 1, 2
    while not check(hi).ok:
        lo, hi = hi, 2 * hi
        if hi > MAX_M or check(hi).violated == FLOAT_RANGE:
            # report the last candidate that was still representable
            rep = check(min(lo, MAX_M))
            raise ConstructionError(
                f"no admissible m_n up to {MAX_M}; first violated condition: {rep.violated}",
                violated=rep.violated,
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if check(mid).ok:
            hi = mid
        else:
            lo = mid
    return hi


def adaptive_construction(
    target: ThresholdTarget,
    alpha_seq: Optional[AlphaSchedule] = None,
    rho: float = 1.0,
    n_levels: int = 4,
    delta: Optional[float] = None,
):
    """Adaptive stack with witness points v_0..v_{n_levels}.

    ``delta`` is the constant in the separation conditions; it defaults to
    the target threshold.
    """
    if n_levels < 2:
        raise DomainError("adaptive construction needs n_levels >= 2")
    if not rho > 0:
        raise DomainError("rho must be positive")
    alpha_of = _schedule_fn(alpha_seq, target.alpha)
    alphas = [alpha_of(n) for n in range(1, n_levels + 2)]
    if any(a <= 0 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise DomainError("alpha schedule must be positive and strictly increasing")
    if any(a >= target.alpha for a in alphas):
        raise DomainError("alpha schedule must stay below its limit alpha")
    delta = target.delta1 if delta is None else float(delta)

    rho_n = float(rho)
    heights = [_lower_witness_height(alphas[0]) / rho_n]
    levels, rows = [], []
    for n in range(1, n_levels + 1):
        a_n, a_next = alphas[n - 1], alphas[n]
        b_n = beta_of_alpha(a_n)

        def check(m, n=n, a_n=a_n, a_next=a_next, rho_n=rho_n):
            return level_conditions(n, m, a_n, rho_n, a_next, heights, alpha_of, delta)

        m_n = _smallest_m(check)
        levels.append(AdaptiveLevel(n, a_n, b_n, rho_n, m_n))
        rows.extend(RowSpec(a_n, rho_n * b_n**m) for m in range(m_n))
        s = math.sqrt(1.0 + a_n * a_n)
        heights.append(a_n * s / (s - 1.0) / (rho_n * b_n ** (m_n - 1)))
        s_next = math.sqrt(1.0 + a_next * a_next)
        rho_n = rho_n * b_n**m_n * (s + 1.0) / (a_n * s) * (a_next * s_next / (s_next + 1.0))

    spec = ProductSpec(tuple(rows), Adaptive(tuple(levels), float(target.alpha)))
    return spec, WitnessSet(tuple(Point(0.0, h) for h in heights))


def recheck_conditions(spec: ProductSpec, witness: WitnessSet, target: ThresholdTarget, alpha_seq=None, delta=None):
    """Re-evaluate the level conditions of a finished adaptive construction.

    Returns one ConditionReport per level for m_n and for m_n - 1 (None when
    m_n = 1, since zero rows is not a level).
    """
    alpha_of = _schedule_fn(alpha_seq, target.alpha)
    delta = target.delta1 if delta is None else delta
    heights = list(witness.heights)
    out = []
    for lev in spec.kind.levels:
        prev = heights[: lev.n]
        at = level_conditions(lev.n, lev.m_n, lev.alpha_n, lev.rho_n, alpha_of(lev.n + 1), prev, alpha_of, delta)
        below = None
        if lev.m_n > 1:
            below = level_conditions(lev.n, lev.m_n - 1, lev.alpha_n, lev.rho_n, alpha_of(lev.n + 1), prev, alpha_of, delta)
        out.append((at, below))
    return out


def phi(a: float, alpha_n: float, t):
    """|b_{ia}((1 + i alpha_n) t)|^2."""
    t = np.asarray(t, dtype=float)
    return ((a - alpha_n * t) ** 2 + t * t) / ((a + alpha_n * t) ** 2 + t * t)


def phi_product_is_edge_min(a: float, b: float, alpha_n: float, t_list) -> bool:
    """True iff phi_a * phi_b over t_list is smallest at its first or last entry."""
    vals = phi(a, alpha_n, t_list) * phi(b, alpha_n, t_list)
    k = int(np.argmin(vals))
    return k == 0 or k == len(vals) - 1 or vals[k] >= min(vals[0], vals[-1])


def axis_zeros(spec: ProductSpec) -> list[Point]:
    """The zero (1 + i alpha)/gamma of every row.

    For witnesses on the imaginary axis, |b_v(x + iy)| grows with |x|, so
    these zeros (and their mirror images) minimize |f| over each row.
    """
    return [Point.halfplane(r.zero(0)) for r in spec.rows]


def witness_log_modulus(witness: WitnessSet, z: complex) -> float:
    acc = 0.0
    for p in witness.v:
        w = p.z
        s = 4.0 * z.imag * w.imag / abs(z - w.conjugate()) ** 2
        acc += 0.5 * math.log1p(-s) if s < 0.5 else math.log(abs(z - w) / abs(z - w.conjugate()))
    return acc


def witness_min_on_zeros(spec: ProductSpec, witness: WitnessSet) -> float:
    """Certified lower end of min over all zeros of |f|, f = prod b_{v_n}."""
    n = len(witness.v)
    vals = [math.exp(witness_log_modulus(witness, p.z)) * (1.0 - 1e-13 * n) for p in axis_zeros(spec)]
    return min(vals)


def sparse_witness_product(spec: ProductSpec, witness: WitnessSet, delta: float) -> WitnessSet:
    """Greedy thinning of the witness points keeping |f_sub| >= delta on the zeros."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    zeros = [p.z for p in axis_zeros(spec)]
    logs = np.zeros(len(zeros))
    kept = []
    log_delta = math.log(delta)
    for i, p in enumerate(witness.v):
        single = WitnessSet((p,))
        add = np.array([witness_log_modulus(single, z) for z in zeros])
        trial = logs + add
        slack = 1e-13 * (len(kept) + 1)
        if np.all(trial + math.log1p(-slack) >= log_delta):
            logs = trial
            kept.append(i)
    return witness.subset(kept)
