import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_threshold.errors import ChartMismatchError, DomainError
from blaschke_threshold.geometry import (
    Chart,
    Point,
    Rectangle,
    cayley,
    inverse_cayley,
    level_rectangle,
    log_blaschke_factor,
    pseudo_dist,
    pseudo_dist_array,
)

H = Point.halfplane
D = Point.disk


def test_point_validation():
    with pytest.raises(DomainError):
        Point(0.0, 0.0)
    with pytest.raises(DomainError):
        Point(0.0, -1.0)
    with pytest.raises(DomainError):
        Point(0.6, 0.8, Chart.DISK)
    with pytest.raises(DomainError):
        Point(float("nan"), 1.0)
    assert Point(0.3, -0.4, Chart.DISK).z == complex(0.3, -0.4)


def test_pseudo_dist_examples(oracle):
    assert pseudo_dist(H(1j), H(1j)) == 0.0
    assert pseudo_dist(H(2j), H(1j)) == pytest.approx(oracle("pseudo_dist_2i_i"), abs=1e-15)
    assert pseudo_dist(H(0.5857864376269049j), H(1 + 1j)) == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_chart_mismatch():
    with pytest.raises(ChartMismatchError):
        pseudo_dist(H(1j), D(0.1))
    with pytest.raises(ChartMismatchError):
        cayley(D(0.1))
    with pytest.raises(ChartMismatchError):
        inverse_cayley(H(1j))


def test_log_blaschke_factor(oracle):
    assert log_blaschke_factor(H(2j), H(1j)) == pytest.approx(oracle("log_factor_2i_i"), rel=1e-14)
    z = H(complex(1e-8, 1.0))
    val = log_blaschke_factor(z, H(1j))
    assert math.isfinite(val) and val < -15
    assert math.exp(val) == pytest.approx(pseudo_dist(z, H(1j)), rel=1e-12)
    far = log_blaschke_factor(H(complex(1e6, 1.0)), H(1j))
    assert -1e-11 < far < 0
    assert far == pytest.approx(oracle("log_factor_1e6_plus_i"), rel=1e-10)
    assert log_blaschke_factor(H(1j), H(1j)) == -math.inf


def test_cayley_examples(oracle):
    assert abs(cayley(H(1j)).z) < 1e-16
    w = cayley(H(2j))
    assert w.chart is Chart.DISK
    assert w.re == pytest.approx(oracle("cayley_2i"), abs=1e-15) and abs(w.im) < 1e-16
    assert pseudo_dist(cayley(H(2j)), cayley(H(1j))) == pytest.approx(1 / 3, abs=1e-15)
    assert inverse_cayley(cayley(H(3 + 2j))).z == pytest.approx(3 + 2j, abs=1e-13)


def test_level_rectangle_examples(oracle):
    r = level_rectangle(H(1j), 1e-8)
    assert r.re_half_width < 1e-7 and r.im_high - r.im_low < 1e-7
    r = level_rectangle(H(1j), 1 / math.sqrt(3))
    assert r.re_half_width == pytest.approx(oracle("rect_half_width_eps_inv_sqrt3"), abs=1e-15)
    a, b = oracle("rect_vertex_eps_half")
    r = level_rectangle(H(1j), 0.5)
    assert r.re_half_width == pytest.approx(a, abs=1e-15)
    assert r.im_low == pytest.approx(b, abs=1e-15)
    e = 0.5
    assert (a * a + b * b + 1) * (1 - e * e) == pytest.approx(2 * b * (1 + e * e), abs=1e-12)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            level_rectangle(H(1j), bad)


@pytest.mark.parametrize("lam", [1j, 3 + 0.2j, -5 + 40j])
@pytest.mark.parametrize("eps", [0.05, 0.3, 0.577, 0.9])
def test_level_rectangle_vertices_and_interior(lam, eps):
    r = level_rectangle(H(lam), eps)
    for v in r.vertices():
        assert pseudo_dist(v, H(lam)) == pytest.approx(eps, abs=1e-10)
    z = r.sample(100, 100)
    assert np.max(pseudo_dist_array(z, lam)) <= eps + 1e-10


def test_rectangle_validation():
    with pytest.raises(DomainError):
        Rectangle(0.0, -1.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        Rectangle(0.0, 1.0, 0.0, 2.0)


half = st.tuples(st.floats(-50, 50), st.floats(1e-3, 50)).map(lambda t: H(complex(*t)))
disk = st.tuples(st.floats(0, 0.999), st.floats(0, 2 * math.pi)).map(lambda t: D(t[0] * complex(math.cos(t[1]), math.sin(t[1]))))


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.tuples(half, half, half), st.tuples(disk, disk, disk)))
def test_metric_axioms(tri):
    a, b, c = tri
    ab, bc, ac = pseudo_dist(a, b), pseudo_dist(b, c), pseudo_dist(a, c)
    assert ab == pytest.approx(pseudo_dist(b, a), abs=1e-14)
    assert 0 <= ab < 1 or ab == pytest.approx(1.0)
    assert ac <= (ab + bc) / (1 + ab * bc) + 1e-12


@settings(max_examples=300, deadline=None)
@given(half, half)
def test_cayley_isometry(z, w):
    a, b = cayley(z), cayley(w)
    # rounding of the images is amplified by 1/(1-|w|) near the circle
    cond = 1 / min(1 - abs(a.z), 1 - abs(b.z))
    assert pseudo_dist(a, b) == pytest.approx(pseudo_dist(z, w), abs=1e-15 * cond + 1e-14)


def test_metric_axioms_random_bulk():
    rng = np.random.default_rng(1)
    z = rng.uniform(-20, 20, (10_000, 3)) + 1j * rng.uniform(1e-2, 20, (10_000, 3))
    d = lambda p, q: np.abs(p - q) / np.abs(p - np.conj(q))
    ab, bc, ac = d(z[:, 0], z[:, 1]), d(z[:, 1], z[:, 2]), d(z[:, 0], z[:, 2])
    assert np.all(ac <= (ab + bc) / (1 + ab * bc) + 1e-12)
    w = (z - 1j) / (z + 1j)
    dd = np.abs(w[:, 0] - w[:, 1]) / np.abs(1 - np.conj(w[:, 1]) * w[:, 0])
    assert np.max(np.abs(dd - ab)) < 1e-12


def test_log_factor_matches_mpmath_near_one():
    mp.mp.dps = 50
    for z, lam in [(1e4 + 2j, 1j), (3 + 1e5j, 1j), (0.1 + 0.1j, 5 + 0.1j)]:
        ref = mp.log(abs(mp.mpc(z) - mp.mpc(lam)) / abs(mp.mpc(z) - mp.conj(mp.mpc(lam))))
        assert log_blaschke_factor(H(z), H(lam)) == pytest.approx(float(ref), rel=1e-12)
