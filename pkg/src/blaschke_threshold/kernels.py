"""Grid kernels: log-moduli of periodic rows, witness factors, nearest zeros.

Each kernel has a loop version (compiled by numba when available) and a
vectorized numpy version.  The public wrappers at the bottom dispatch on
``_accel.backend()``.  Both versions evaluate the same formulas in the same
order per point, so they agree to a few ulps.

Row conventions: a row (alpha, gamma) has zeros ((2k+1) + i*alpha)/gamma,
k in Z, and modulus
    |B|^2 = ((p-q)^2 + 4pq cos^2(pi*gamma*x/2)) / ((1-pq)^2 + 4pq cos^2(pi*gamma*x/2))
with p = exp(-pi*gamma*y), q = exp(-pi*alpha).
"""

import math

import numpy as np

from . import _accel
from ._accel import njit

try:
    from numba import prange
except ImportError:  # pragma: no cover
    prange = range

PI = math.pi
# Hard cap on rows evaluated past the constructed ones for a uniform tail.
MAX_TAIL_ROWS = 4096


@njit(inline="always")
def _row_log_modulus(alpha, gamma, x, y):
    a = PI * gamma * y
    b = PI * alpha
    p = math.exp(-a)
    q = math.exp(-b)
    if abs(a - b) < 1.0:
        d = q * math.expm1(b - a)
    else:
        d = p - q
    s = -math.expm1(-(a + b))
    u = gamma * x
    c = math.cos(0.5 * PI * (u - 2.0 * math.floor(0.5 * u)))
    w = 4.0 * p * q * c * c
    num = d * d + w
    if num == 0.0:
        return -math.inf
    return 0.5 * (math.log(num) - math.log(s * s + w))


def _row_log_modulus_np(alpha, gamma, x, y):
    a = PI * gamma * y
    b = PI * alpha
    p = np.exp(-a)
    q = math.exp(-b)
    d = np.where(np.abs(a - b) < 1.0, q * np.expm1(b - a), p - q)
    s = -np.expm1(-(a + b))
    u = gamma * x
    c = np.cos(0.5 * PI * (u - 2.0 * np.floor(0.5 * u)))
    w = 4.0 * p * q * c * c
    num = d * d + w
    with np.errstate(divide="ignore"):
        return 0.5 * (np.log(num) - np.log(s * s + w))


# ---------------------------------------------------------------- row sums


@njit(parallel=True)
def _log_rows_sum_nb(alphas, gammas, xs, ys):
    n = xs.shape[0]
    out = np.empty(n)
    for i in prange(n):
        acc = 0.0
        for r in range(alphas.shape[0]):
            acc += _row_log_modulus(alphas[r], gammas[r], xs[i], ys[i])
        out[i] = acc
    return out


def _log_rows_sum_np(alphas, gammas, xs, ys):
    acc = np.zeros(xs.shape[0])
    for r in range(alphas.shape[0]):
        acc += _row_log_modulus_np(alphas[r], gammas[r], xs, ys)
    return acc


# ------------------------------------------------------ uniform stack + tail


@njit(inline="always")
def _tail_bound(alpha, beta, gamma, y):
    """Bound on sum over rows gamma, gamma*beta, ... of log(1/|B_row|); inf if unusable."""
    q = math.exp(-PI * alpha)
    e = math.exp(-PI * gamma * y)
    if not e > q:
        return math.inf
    return (1.0 + q) * PI * gamma * y / ((e - q) * (1.0 - beta))


@njit(parallel=True)
def _uniform_log_sum_nb(alpha, beta, rho, n_levels, tol, xs, ys):
    n = xs.shape[0]
    logs = np.empty(n)
    tails = np.empty(n)
    used = np.empty(n, dtype=np.int64)
    for i in prange(n):
        acc = 0.0
        k = 0
        tb = math.inf
        while True:
            if k >= n_levels:
                tb = _tail_bound(alpha, beta, rho * beta**k, ys[i])
                if tb < tol or k >= n_levels + MAX_TAIL_ROWS:
                    break
            acc += _row_log_modulus(alpha, rho * beta**k, xs[i], ys[i])
            k += 1
        logs[i] = acc
        tails[i] = tb
        used[i] = k
    return logs, tails, used


def _uniform_log_sum_np(alpha, beta, rho, n_levels, tol, xs, ys):
    n = xs.shape[0]
    logs = np.zeros(n)
    tails = np.full(n, np.inf)
    used = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    q = math.exp(-PI * alpha)
    k = 0
    while active.any():
        if k >= n_levels:
            g = rho * beta**k
            y = ys[active]
            e = np.exp(-PI * g * y)
            with np.errstate(divide="ignore", invalid="ignore"):
                tb = np.where(e > q, (1.0 + q) * PI * g * y / ((e - q) * (1.0 - beta)), np.inf)
            idx = np.flatnonzero(active)
            done = (tb < tol) | (k >= n_levels + MAX_TAIL_ROWS)
            tails[idx[done]] = tb[done]
            used[idx[done]] = k
            active[idx[done]] = False
            if not active.any():
                break
        idx = np.flatnonzero(active)
        logs[idx] += _row_log_modulus_np(alpha, rho * beta**k, xs[idx], ys[idx])
        k += 1
    return logs, tails, used


# ------------------------------------------------------- witness factors


@njit(parallel=True)
def _log_factor_sum_nb(vre, vim, xs, ys):
    n = xs.shape[0]
    out = np.empty(n)
    for i in prange(n):
        acc = 0.0
        for j in range(vre.shape[0]):
            dx = xs[i] - vre[j]
            near = dx * dx + (ys[i] - vim[j]) ** 2
            far = dx * dx + (ys[i] + vim[j]) ** 2
            s = 4.0 * ys[i] * vim[j] / far
            if near == 0.0:
                acc += -math.inf
            elif s < 0.5:
                acc += 0.5 * math.log1p(-s)
            else:
                acc += 0.5 * (math.log(near) - math.log(far))
        out[i] = acc
    return out


def _log_factor_sum_np(vre, vim, xs, ys):
    acc = np.zeros(xs.shape[0])
    for j in range(vre.shape[0]):
        dx = xs - vre[j]
        near = dx * dx + (ys - vim[j]) ** 2
        far = dx * dx + (ys + vim[j]) ** 2
        s = 4.0 * ys * vim[j] / far
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(s < 0.5, 0.5 * np.log1p(-np.minimum(s, 0.5)), 0.5 * (np.log(near) - np.log(far)))
        acc += val
    return acc


# ---------------------------------------------------------- nearest zeros


@njit(parallel=True)
def _min_dist_rows_nb(alphas, gammas, xs, ys):
    n = xs.shape[0]
    out = np.empty(n)
    for i in prange(n):
        best = math.inf
        for r in range(alphas.shape[0]):
            g = gammas[r]
            yk = alphas[r] / g
            k0 = math.floor(0.5 * (g * xs[i] - 1.0) + 0.5)
            for k in range(k0 - 1, k0 + 2):
                dx = xs[i] - (2.0 * k + 1.0) / g
                d2 = (dx * dx + (ys[i] - yk) ** 2) / (dx * dx + (ys[i] + yk) ** 2)
                if d2 < best:
                    best = d2
        out[i] = math.sqrt(best)
    return out


def _min_dist_rows_np(alphas, gammas, xs, ys):
    best = np.full(xs.shape[0], np.inf)
    for r in range(alphas.shape[0]):
        g = gammas[r]
        yk = alphas[r] / g
        k0 = np.floor(0.5 * (g * xs - 1.0) + 0.5)
        for off in (-1.0, 0.0, 1.0):
            dx = xs - (2.0 * (k0 + off) + 1.0) / g
            d2 = (dx * dx + (ys - yk) ** 2) / (dx * dx + (ys + yk) ** 2)
            np.minimum(best, d2, out=best)
    return np.sqrt(best)


# ----------------------------------------------------------------- dispatch


def _flat(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())


def log_rows_sum(alphas, gammas, xs, ys):
    """Sum over rows of log|B_row(x + iy)| for flat point arrays."""
    args = (_flat(alphas), _flat(gammas), _flat(xs), _flat(ys))
    if _accel.backend() == "numba":
        return _log_rows_sum_nb(*args)
    return _log_rows_sum_np(*args)


def uniform_log_sum(alpha, beta, rho, n_levels, tol, xs, ys):
    """Log-modulus of a uniform stack with certified tail.

    Returns (log_sum, tail_bound, rows_used) per point; the true log-modulus
    lies in [log_sum - tail_bound, log_sum].
    """
    args = (float(alpha), float(beta), float(rho), int(n_levels), float(tol), _flat(xs), _flat(ys))
    if _accel.backend() == "numba":
        return _uniform_log_sum_nb(*args)
    return _uniform_log_sum_np(*args)


def log_factor_sum(vre, vim, xs, ys):
    """Sum of log|b_v(z)| over half-plane points v = vre + i*vim."""
    args = (_flat(vre), _flat(vim), _flat(xs), _flat(ys))
    if _accel.backend() == "numba":
        return _log_factor_sum_nb(*args)
    return _log_factor_sum_np(*args)


def min_dist_rows(alphas, gammas, xs, ys):
    """Pseudo distance from each point to the nearest zero of any row."""
    args = (_flat(alphas), _flat(gammas), _flat(xs), _flat(ys))
    if _accel.backend() == "numba":
        return _min_dist_rows_nb(*args)
    return _min_dist_rows_np(*args)
