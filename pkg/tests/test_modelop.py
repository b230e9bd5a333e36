import math

import numpy as np
import pytest

from blaschke_threshold.blaschke import ProductSpec, RowSpec, row_modulus
from blaschke_threshold.construction import ThresholdTarget, WitnessSet, adaptive_construction, uniform_stack
from blaschke_threshold.covering import c1_upper, eta_formula
from blaschke_threshold.errors import DomainError, IllConditionedGram
from blaschke_threshold.geometry import Point, cayley, pseudo_dist
from blaschke_threshold.modelop import (
    build_disk_section,
    build_section,
    delta_sweep,
    family_targets,
    feasible_frontier,
    interpolation_separation,
    inverse_norm_sweep,
    phase_targets,
    section_spectrum,
    section_zeros,
    sweep_targets,
    witness_targets,
)

D1 = 1 / math.sqrt(3)


@pytest.fixture(scope="module")
def adaptive4():
    return adaptive_construction(ThresholdTarget.from_delta1(D1), n_levels=4)


def brute_ratio(section, n_vec=100_000, seed=0):
    """min and max of ||Tx||/||x|| over random coefficient vectors."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((n_vec, section.n)) + 1j * rng.standard_normal((n_vec, section.n))
    g = np.asarray(section.gram)
    t = np.asarray(section.targets)
    nx = np.einsum("ij,jk,ik->i", c.conj(), g, c).real
    tc = c * t
    ntx = np.einsum("ij,jk,ik->i", tc.conj(), g, tc).real
    r = np.sqrt(ntx / nx)
    return r.min(), r.max()


def test_one_by_one():
    for t in (0.3, 1.0, 2 - 1j):
        sp = section_spectrum(build_section([1j + 3], [t]))
        assert sp.sigma_min == pytest.approx(abs(t), rel=1e-15)
        assert sp.sigma_max == pytest.approx(abs(t), rel=1e-15)
        assert sp.inverse_norm * sp.sigma_min == pytest.approx(1.0, rel=1e-15)


def test_two_by_two_identity_and_gram(oracle):
    s = build_disk_section([Point.disk(0.0), Point.disk(0.5)], [1, 1])
    assert s.gram[0, 1] == pytest.approx(oracle("gram_0_half"), rel=1e-15)
    assert np.all(np.diag(s.gram) == 1.0)
    sp = section_spectrum(s)
    assert sp.sigma_min == pytest.approx(1.0, abs=1e-12)
    assert sp.sigma_max == pytest.approx(1.0, abs=1e-12)
    assert sp.gram_condition == pytest.approx(oracle("gram_cond_0_half"), rel=1e-12)


def test_two_by_two_pencil_vs_oracle(oracle):
    refs = oracle("pencil_0_half_targets_delta_1")
    for key, (lo, hi) in refs.items():
        d = float(key)
        sp = section_spectrum(build_disk_section([Point.disk(0.0), Point.disk(0.5)], [d, 1.0]))
        assert sp.sigma_min == pytest.approx(float(lo), abs=1e-12)
        assert sp.sigma_max == pytest.approx(float(hi), abs=1e-12)
        # explicit 2x2 characteristic polynomial of the pencil
        g01 = math.sqrt(0.75)
        a, b, c = 1 - g01**2, -(d * d + 1 - 2 * d * g01**2), d * d * (1 - g01**2)
        mu = sorted(np.roots([a, b, c]).real)
        assert sp.sigma_min == pytest.approx(math.sqrt(mu[0]), abs=1e-12)


def test_halfplane_and_disk_sections_agree():
    z = np.array([0.3 + 0.7j, -1 + 2j, 2 + 0.4j, 0.1 + 5j])
    t = np.array([0.9, 0.5j, -0.7, 0.3 + 0.3j])
    a = build_section(z, t)
    b = build_disk_section([cayley(Point.halfplane(c)) for c in z], t)
    np.testing.assert_allclose(a.gram, b.gram, atol=1e-14)
    assert np.allclose(a.gram, a.gram.conj().T, atol=1e-14)
    assert section_spectrum(a).sigma_min == pytest.approx(section_spectrum(b).sigma_min, abs=1e-12)


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    z = np.array(section_zeros(uniform_stack(1.0, 1.0, 3)[0], 2))[:7]
    t = rng.uniform(0.2, 1, 7) * np.exp(1j * rng.uniform(0, 6, 7))
    base = section_spectrum(build_section(z, t))
    for _ in range(5):
        p = rng.permutation(7)
        sp = section_spectrum(build_section(z[p], t[p]))
        assert sp.sigma_min == pytest.approx(base.sigma_min, abs=1e-12)
        assert sp.sigma_max == pytest.approx(base.sigma_max, abs=1e-12)


def test_constant_targets():
    zs = section_zeros(uniform_stack(1.0, 1.0, 3)[0], 2)
    for t in (0.25, 1.0, -0.5j):
        sp = section_spectrum(build_section(zs, [t] * len(zs)))
        assert sp.sigma_min == pytest.approx(abs(t), rel=1e-10)
        assert sp.sigma_max == pytest.approx(abs(t), rel=1e-10)


def test_build_errors():
    with pytest.raises(DomainError):
        build_section([1j, 1j], [1, 1])
    with pytest.raises(DomainError):
        build_section([1j], [1, 1])
    with pytest.raises(DomainError):
        build_section([1 - 1j], [1])


def test_residuals_and_invariants(adaptive4):
    spec, w = adaptive4
    zs = section_zeros(spec, 3)
    rows = inverse_norm_sweep(spec, w, list(range(1, len(zs) + 1)), per_row=3)
    for r in rows:
        assert r.sigma_min <= r.sigma_max
        assert r.inverse_norm * r.sigma_min == pytest.approx(1.0, rel=1e-14)
    for n in (5, 20, len(zs)):
        sp = section_spectrum(build_section(zs[:n], witness_targets(w, zs[:n])))
        assert sp.residual <= 1e-10


def test_sweep_monotone(adaptive4):
    spec, w = adaptive4
    n = len(section_zeros(spec, 3))
    rows = inverse_norm_sweep(spec, w, list(range(1, n + 1)), per_row=3)
    assert [r.n for r in rows] == list(range(1, n + 1))
    for a, b in zip(rows, rows[1:]):
        assert b.sigma_min <= a.sigma_min + 1e-10
    assert rows[-1].sigma_min < rows[0].sigma_min / 10


def test_sweep_f_identically_one(adaptive4):
    spec, _ = adaptive4
    rows = inverse_norm_sweep(spec, WitnessSet(()), [1, 5, 10, 20], per_row=2)
    for r in rows:
        assert r.sigma_min == pytest.approx(1.0, abs=1e-10)


def test_sweep_errors():
    spec, w = uniform_stack(1.0, 1.0, 2)
    with pytest.raises(DomainError):
        inverse_norm_sweep(spec, w, [3, 2])
    with pytest.raises(DomainError):
        inverse_norm_sweep(spec, w, [1, 999])


def test_ill_conditioned_reports_frontier():
    # nearly coincident zeros make the Gram matrix numerically singular
    z = [1j, 1j * (1 + 1e-9), 2j, 3j]
    with pytest.raises(IllConditionedGram) as e:
        sweep_targets(z, np.ones(4), [1, 2, 3])
    assert e.value.feasible_n == 1
    assert e.value.gram_condition > 1e12


def test_feasible_frontier_constructed(adaptive4):
    spec, w = adaptive4
    n = len(section_zeros(spec, 3))
    assert feasible_frontier(spec, w, per_row=3) == n


def test_brute_force_bounds_and_unit_ball(adaptive4):
    spec, w = adaptive4
    zs = section_zeros(spec, 3)
    for n in (3, 6, 9, 12):
        s = build_section(zs[:n], witness_targets(w, zs[:n]))
        sp = section_spectrum(s)
        lo, hi = brute_ratio(s, seed=n)
        assert sp.sigma_min <= lo + 1e-12
        assert hi <= sp.sigma_max + 1e-12
        # traces of unit-ball functions give contractions
        assert sp.sigma_max <= 1.0 + 1e-10
        # provable lower bound through the Gram condition number
        assert sp.sigma_min >= np.abs(s.targets).min() / math.sqrt(s.gram_condition) - 1e-12


def test_sigma_max_can_exceed_max_target():
    s = build_disk_section([Point.disk(0.0), Point.disk(0.5)], [0.5, 1.0])
    assert section_spectrum(s).sigma_max > 1.3


def test_separation_squared_bound_counterexample(adaptive4):
    # min|t| * sep^2 is not a lower bound for sigma_min on constructed sections
    spec, w = adaptive4
    zs = section_zeros(spec, 3)[:8]
    t = witness_targets(w, zs)
    sp = section_spectrum(build_section(zs, t))
    sep = interpolation_separation(zs).global_separation
    assert sp.sigma_min < np.abs(t).min() * sep**2


def test_delta_sweep(adaptive4):
    spec, w = adaptive4
    rows = delta_sweep(spec, w, [1.0, 0.3, D1 + 0.15], [4, 12], per_row=3)
    assert [r.delta for r in rows] == sorted(r.delta for r in rows)
    for r in rows:
        if r.delta == 1.0 and r.family in ("witness", "constant"):
            assert r.inverse_norm == pytest.approx(1.0, abs=1e-10)
        if r.delta < D1:
            assert math.isnan(r.eta) and r.c1_upper == math.inf
        else:
            assert r.c1_upper == pytest.approx(c1_upper(eta_formula(1.0, r.delta)))
    w_rows = [r for r in rows if r.family == "witness" and r.delta == D1 + 0.15]
    for r in w_rows:
        assert r.inverse_norm <= r.c1_upper
    with pytest.raises(DomainError):
        delta_sweep(spec, w, [1.5], 4)
    with pytest.raises(DomainError):
        family_targets(spec, w, section_zeros(spec), 0.5, "bogus")


def test_delta_trend_ratio_grows(adaptive4):
    spec, w = adaptive4
    n_all = len(section_zeros(spec, 3))
    ratios = []
    for n in (n_all // 2, n_all):
        rows = delta_sweep(spec, w, [0.3, D1 + 0.15], n, per_row=3, families=("witness",))
        below, above = rows[0].inverse_norm, rows[1].inverse_norm
        ratios.append(below / above)
    assert ratios[1] > ratios[0]


def test_phase_targets_modulus(adaptive4):
    spec, w = adaptive4
    zs = section_zeros(spec, 2)
    t = phase_targets(w, zs, 0.7)
    np.testing.assert_allclose(np.abs(t), 0.7, rtol=1e-15)


def test_interpolation_separation(oracle):
    one = interpolation_separation(ProductSpec((RowSpec(1.0, 1.0),)))
    assert one.per_row[0][2] == pytest.approx(oracle("interp_const_alpha1"), rel=1e-14)
    assert one.global_separation == pytest.approx(oracle("interp_const_alpha1"), rel=1e-12)
    assert abs(oracle("interp_partial_product_K10000") - one.per_row[0][2]) < 1e-3
    assert interpolation_separation([2 + 1j]).global_separation == 1.0
    far = ProductSpec((RowSpec(1.0, 1.0), RowSpec(1.0, 1e-4)))
    rep = interpolation_separation(far)
    c = oracle("interp_const_alpha1")
    expect = min(
        c * row_modulus(far.rows[1 - i], Point.halfplane(far.rows[i].zero(k))) for i in (0, 1) for k in range(-4, 4)
    )
    assert rep.global_separation == pytest.approx(expect, rel=1e-12)
    for i in (0, 1):
        for k in range(-4, 4):
            lam = Point.halfplane(far.rows[i].zero(k))
            for m in range(-4, 4):
                mu = Point.halfplane(far.rows[1 - i].zero(m))
                assert pseudo_dist(lam, mu) >= D1 - 1e-10
