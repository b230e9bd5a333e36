import math

import mpmath as mp
import numpy as np
import pytest

from blaschke_threshold.blaschke import (
    CertifiedValue,
    FiniteRows,
    ProductSpec,
    RowSpec,
    alpha_of_delta1,
    beta_of_alpha,
    delta1_of_alpha,
    interpolation_constant,
    envelope_lower_bound,
    envelope_upper_bound,
    product_log_bounds,
    product_modulus,
    row_envelope,
    row_modulus,
    row_zeros,
    strip_bounds,
    uniform_stack_spec,
    uniform_tail_log_bounds,
)
from blaschke_threshold.errors import DomainError
from blaschke_threshold.geometry import Point

H = Point.halfplane


def factor_log_sum(alpha, gamma, z, kmax):
    """log of prod_{|k|<=kmax} |b_{z_k}(z)| and a bound on the omitted factors."""
    k = np.arange(-kmax - 1, kmax + 1, dtype=float)
    xk, yk = (2 * k + 1) / gamma, alpha / gamma
    x, y = z.real, z.imag
    s = 4 * y * yk / ((x - xk) ** 2 + (y + yk) ** 2)
    c = 0.5 + abs(x) * gamma / 2
    tail = 2 * y * yk * gamma**2 / (kmax - c) / (1 - np.max(s))
    return math.fsum(0.5 * np.log1p(-s)), tail


def mp_row(alpha, gamma, z):
    p, q = mp.e ** (-mp.pi * gamma * z.imag), mp.e ** (-mp.pi * alpha)
    c = mp.cos(mp.pi * gamma * z.real / 2)
    return mp.sqrt(((p - q) ** 2 + 4 * p * q * c**2) / ((1 - p * q) ** 2 + 4 * p * q * c**2))


def test_row_modulus_examples(oracle):
    row = RowSpec(1.0, 1.0)
    assert row_modulus(row, H(1 + 1j)) == pytest.approx(0.0, abs=1e-15)
    assert row_modulus(row, H(1j)) == pytest.approx(oracle("row_modulus_a1_g1_at_i"), rel=1e-14)
    assert row_modulus(row, H(1j)) == pytest.approx(oracle("inv_cosh_pi"), rel=1e-14)
    lo, hi = row_envelope(row, 1.0)
    val = row_modulus(row, H(complex(math.sqrt(2), 1.0)))
    assert lo <= val <= hi


def test_row_zeros_examples():
    r = RowSpec(1.0, 1.0)
    assert row_zeros(r, 0, 0)[0].z == 1 + 1j
    assert row_zeros(r, -1, -1)[0].z == -1 + 1j
    assert row_zeros(RowSpec(2.0, 0.5), 0, 0)[0].z == 2 + 4j
    with pytest.raises(DomainError):
        row_zeros(r, 2, 1)


def test_rowspec_validation():
    for a, g in [(0, 1), (1, 0), (-1, 1), (float("inf"), 1)]:
        with pytest.raises(DomainError):
            RowSpec(a, g)
    with pytest.raises(DomainError):
        ProductSpec((RowSpec(1, 1), RowSpec(1, 1)))
    with pytest.raises(DomainError):
        ProductSpec(())


def test_threshold_helpers():
    assert beta_of_alpha(1.0) == pytest.approx(3 - 2 * math.sqrt(2), rel=1e-15)
    assert alpha_of_delta1(delta1_of_alpha(0.7)) == pytest.approx(0.7, rel=1e-14)
    for a in (0.1, 1.0, 4.0):
        lo, hi = strip_bounds(a)
        # the top of one strip is the bottom of the next one, gamma -> beta*gamma
        assert hi == pytest.approx(lo / beta_of_alpha(a), rel=1e-13)
    with pytest.raises(DomainError):
        alpha_of_delta1(1.0)


def test_single_row_product_matches_row_modulus():
    spec = ProductSpec((RowSpec(1.0, 1.0),))
    for z in (0.3 + 0.2j, 1j, 5 + 7j):
        v = product_modulus(spec, H(z))
        assert v.width <= 1e-13
        assert row_modulus(spec.rows[0], H(z)) in v


def test_uniform_product_respects_envelope_at_examples():
    spec = uniform_stack_spec(1.0, 1.0, 8)
    k = spec.kind
    v0 = H(0.5857864376269049j)
    val = product_modulus(spec, v0)
    assert val.lo >= envelope_lower_bound(1.0, k.beta, 1.0, v0.im)
    y = 0.5
    assert product_modulus(spec, H(complex(0.3, y))).lo >= envelope_lower_bound(1.0, k.beta, 1.0, y)
    y = 3.0
    assert product_modulus(spec, H(complex(0.3, y))).hi <= envelope_upper_bound(1.0, k.beta, 1.0, y)


def test_envelope_bounds_examples(oracle):
    b = 3 - 2 * math.sqrt(2)
    assert envelope_upper_bound(1.0, b, 1.0, 1 / b) == pytest.approx(oracle("envelope_upper_y_inv_beta"), rel=1e-12)
    assert envelope_upper_bound(1.0, b, 1.0, 1 + 1e-6) == pytest.approx(1.0, abs=1e-5)
    ys = np.geomspace(1.001, 1e6, 50)
    ups = [envelope_upper_bound(1.0, b, 1.0, y) for y in ys]
    assert all(u2 < u1 for u1, u2 in zip(ups, ups[1:]))
    low = envelope_lower_bound(1.0, b, 1.0, 0.1)
    assert 0 < low < 1
    spec = uniform_stack_spec(1.0, 1.0, 8)
    xs = np.random.default_rng(2).uniform(-10, 10, 100)
    lo, _ = product_log_bounds(spec, xs, np.full(100, 0.1))
    assert np.all(np.exp(lo) >= low)
    with pytest.raises(DomainError):
        envelope_lower_bound(1.0, b, 1.0, 0.9995)
    with pytest.raises(DomainError):
        envelope_upper_bound(1.0, b, 1.0, 1.0)


def test_interpolation_constant(oracle):
    assert interpolation_constant(1e-8) == pytest.approx(1.0, abs=1e-10)
    assert interpolation_constant(1.0) == pytest.approx(oracle("interp_const_alpha1"), rel=1e-14)
    assert oracle("interp_partial_product_K100000") == pytest.approx(interpolation_constant(1.0), abs=1e-3)
    for a in (1e-3, 0.3, 2.0, 20.0):
        assert interpolation_constant(a) == pytest.approx(float(mp.pi * a / mp.sinh(mp.pi * a)), rel=1e-13)


def test_row_modulus_matches_factor_product():
    rng = np.random.default_rng(3)
    for _ in range(200):
        alpha, gamma = rng.uniform(0.2, 3), rng.uniform(0.2, 3)
        z = complex(rng.uniform(-5, 5), rng.uniform(0.05, 5) / gamma)
        lg, tail = factor_log_sum(alpha, gamma, z, 10_000)
        closed = math.log(row_modulus(RowSpec(alpha, gamma), H(z)))
        assert lg - tail - 1e-9 <= closed <= lg + 1e-9
        assert abs(closed - lg) < 1e-6 + tail


def test_row_modulus_range():
    rng = np.random.default_rng(4)
    row = RowSpec(0.8, 1.7)
    xs, ys = rng.uniform(-30, 30, 1000), rng.uniform(1e-3, 30, 1000)
    for x, y in zip(xs, ys):
        assert 0.0 <= row_modulus(row, H(complex(x, y))) <= 1.0
    for p in row_zeros(row, -5, 5):
        assert row_modulus(row, p) == pytest.approx(0.0, abs=1e-12)


def test_certified_intervals_contain_mpmath():
    mp.mp.dps = 40
    rng = np.random.default_rng(5)
    for i in range(1000):
        alpha = rng.choice([0.5, 1.0, 2.0])
        rho = rng.choice([0.5, 1.0])
        levels = int(rng.integers(1, 6))
        spec = uniform_stack_spec(alpha, rho, levels)
        y = float(np.exp(rng.uniform(math.log(0.01), math.log(1e4))))
        z = complex(rng.uniform(-3, 3) * y, y)
        val = product_modulus(spec, H(z))
        # reference: rows until the remaining log-contribution is negligible
        acc, n = mp.mpf(0), 0
        beta = mp.mpf(spec.kind.beta)
        while True:
            t = mp.log(mp_row(mp.mpf(alpha), mp.mpf(rho) * beta**n, mp.mpc(z)))
            acc += t
            n += 1
            if n > levels and abs(t) < mp.mpf(10) ** -25:
                break
        ref = float(mp.e**acc)
        assert val.lo * (1 - 1e-12) <= ref <= val.hi * (1 + 1e-12), (i, z, val, ref)


def test_tail_bounds_agree_with_grid_kernel():
    spec = uniform_stack_spec(1.0, 1.0, 3)
    z = 0.4 + 50j
    lo_t, hi_t = uniform_tail_log_bounds(spec.kind, z)
    head = sum(math.log(row_modulus(r, H(z))) for r in spec.rows)
    lo, hi = product_log_bounds(spec, [z.real], [z.imag])
    assert head + lo_t <= hi[0] + 1e-12
    assert lo[0] <= head + hi_t + 1e-12


def test_certified_value_validation():
    with pytest.raises(DomainError):
        CertifiedValue(0.5, 0.4)
    assert 0.45 in CertifiedValue(0.4, 0.5)
    with pytest.raises(DomainError):
        product_modulus(ProductSpec((RowSpec(1, 1),), FiniteRows()), H(1j), tol=0.0)
