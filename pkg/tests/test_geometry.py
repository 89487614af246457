import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schottky_gaps.audit import random_reduced_word, reduced_words_upto
from schottky_gaps.config import arc_of_circle, derive_isometry_circle
from schottky_gaps.errors import GeometryDomainError, InvariantError
from schottky_gaps.geometry import (CartanCoords, DiskMap, ReflectionCircle, TangentCircle, a_matrix,
                                    cartan_decompose, cartan_reconstruct, circle_through,
                                    curvature_via_cartan, kappa_via_derivative, reflect_boundary_point,
                                    reflect_tangent_circle, tangency_via_cartan, word_to_map, wrap_angle)
from schottky_gaps.orbit import enumerate_by_depth, word_tangent_circle

L_SYM = 7 * math.pi / 12
angles = st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True, allow_nan=False)


def circ_dist(a, b):
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, 2 * math.pi - d)


@pytest.fixture(scope="module")
def c_two_thirds():
    return derive_isometry_circle(2 * math.pi / 3, L_SYM)


# ---------------------------------------------------------------- ReflectionCircle / TangentCircle

def test_reflection_circle_rejects_non_orthogonal():
    with pytest.raises(GeometryDomainError):
        ReflectionCircle(complex(2.0, 0.0), 1.0)
    with pytest.raises(GeometryDomainError):
        ReflectionCircle(complex(0.5, 0.0), 0.1)


def test_tangent_circle_geometry():
    tc = TangentCircle(math.pi / 2, 4.0)
    assert tc.radius == 0.25
    assert abs(tc.center - 0.75j) < 1e-15
    assert abs(tc.tangency - 1j) < 1e-15
    with pytest.raises(GeometryDomainError):
        TangentCircle(0.0, 0.5)


# ---------------------------------------------------------------- reflect_boundary_point

def test_arc_endpoints_are_fixed(c_two_thirds):
    theta, L = arc_of_circle(c_two_thirds)
    for end in (theta - L / 2, theta + L / 2):
        assert circ_dist(reflect_boundary_point(c_two_thirds, end), end) < 1e-12


@settings(max_examples=200, deadline=None)
@given(phi=angles)
def test_boundary_reflection_is_involution(c_two_thirds, phi):
    once = reflect_boundary_point(c_two_thirds, phi)
    assert circ_dist(reflect_boundary_point(c_two_thirds, once), phi) < 1e-11


def test_boundary_reflection_matches_high_precision_oracle(c_two_thirds):
    mp.mp.dps = 40
    c = mp.mpc(c_two_thirds.center.real, c_two_thirds.center.imag)
    R = mp.mpf(c_two_thirds.radius)
    w = c + R**2 / mp.conj(mp.mpc(1, 0) - c)
    w = w / abs(w)
    oracle = float(mp.arg(w)) % (2 * math.pi)
    assert circ_dist(reflect_boundary_point(c_two_thirds, 0.0), oracle) < 1e-14


def test_boundary_image_on_unit_circle(c_two_thirds, rng):
    for phi in rng.uniform(0, 2 * math.pi, 40):
        z = c_two_thirds.reflect(complex(math.cos(phi), math.sin(phi)))
        assert abs(abs(z) - 1.0) < 1e-12


# ---------------------------------------------------------------- reflect_tangent_circle

def test_tangent_circle_at_fixed_point_keeps_angle(c_two_thirds):
    theta, L = arc_of_circle(c_two_thirds)
    end = theta + L / 2
    # small circle tangent at the fixed point, outside the reflection disk
    tc = TangentCircle(wrap_angle(end), 1e3)
    img = reflect_tangent_circle(c_two_thirds, tc, strict=False)
    assert circ_dist(img.theta, end) < 1e-12
    z = complex(math.cos(end), math.sin(end))
    expected = 1.0 + (tc.kappa - 1.0) * abs(z - c_two_thirds.center) ** 2 / c_two_thirds.radius**2
    assert img.kappa == pytest.approx(expected, rel=1e-9)


def test_tangent_reflection_matches_three_point_fit(cfg, c_two_thirds):
    base = cfg.base_circle
    img = reflect_tangent_circle(c_two_thirds, base)
    pts = [base.center + base.radius * complex(math.cos(a), math.sin(a)) for a in (0.3, 2.1, 4.4)]
    center, radius = circle_through(*(c_two_thirds.reflect(p) for p in pts))
    assert 1.0 / radius == pytest.approx(img.kappa, rel=1e-10)
    assert abs(center - img.center) < 1e-12
    assert abs(abs(center) + radius - 1.0) < 1e-12


def test_inversion_rule_equals_derivative_rule_on_orbit(cfg):
    # every parent/child pair of the depth-8 tree
    worst = 0.0
    for p in enumerate_by_depth(cfg, 8):
        if not p.word:
            continue
        parent = word_tangent_circle(cfg, p.word[1:])
        c = cfg.circles[p.word[0] - 1]
        k1 = reflect_tangent_circle(c, parent).kappa
        k2 = kappa_via_derivative(c, parent)
        worst = max(worst, abs(k1 - k2) / k1)
    assert worst <= 1e-10


def test_growth_band_for_opposite_arc_circles(cfg):
    # tangent circles with r' < r0 sitting in another region: ratio strictly inside (1 + r0/3R, (R+2)^2/R^2)
    for p in enumerate_by_depth(cfg, 6):
        if not p.word:
            continue
        for letter in (1, 2, 3):
            if letter == p.word[0]:
                continue
            c = cfg.circles[letter - 1]
            ratio = reflect_tangent_circle(c, p.circle).kappa / p.circle.kappa
            assert 1 + cfg.r0 / (3 * c.radius) < ratio < (c.radius + 2) ** 2 / c.radius**2


def test_tangent_reflection_rejects_intersecting_circle(cfg):
    c = cfg.circles[0]
    inside = TangentCircle(cfg.arcs[0][0], 1.5)
    with pytest.raises(GeometryDomainError):
        reflect_tangent_circle(c, inside)


# ---------------------------------------------------------------- word_to_map

def test_empty_word_is_identity(cfg):
    g = word_to_map(cfg, ())
    assert np.array_equal(g.m, np.eye(2)) and not g.conjugating


def test_non_reduced_word_rejected(cfg):
    with pytest.raises(GeometryDomainError):
        word_to_map(cfg, (1, 1))
    with pytest.raises(GeometryDomainError):
        word_to_map(cfg, (1, 4))


def test_composition_matches_successive_reflections(cfg, rng):
    g = word_to_map(cfg, (1, 2))
    assert not g.conjugating
    for phi in rng.uniform(0, 2 * math.pi, 20):
        step = reflect_boundary_point(cfg.circles[0], reflect_boundary_point(cfg.circles[1], phi))
        assert circ_dist(g.apply_boundary(phi), step) < 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), length=st.integers(0, 14))
def test_word_map_form_invariants(cfg, seed, length):
    w = random_reduced_word(np.random.default_rng(seed), length)
    g = word_to_map(cfg, w)
    assert g.conjugating == (length % 2 == 1)
    xi, eta = g.xi, g.eta
    assert abs(abs(xi) ** 2 - abs(eta) ** 2 - 1.0) <= 1e-9
    assert g.m[1, 0] == eta.conjugate() and g.m[1, 1] == xi.conjugate()
    for phi in (0.1, 1.7, 4.0):
        assert abs(abs(g.apply(complex(math.cos(phi), math.sin(phi)))) - 1.0) < 1e-9


def test_renormalization_keeps_frobenius_and_rejects_drift():
    g = DiskMap(a_matrix(6.0), False)
    h = g.compose(g)
    assert h.frobenius_sq() == pytest.approx(math.cosh(12.0), rel=1e-14)
    bad = DiskMap(np.array([[2.0, 0.0], [0.0, 2.0]], dtype=complex), False)
    with pytest.raises(InvariantError):
        bad.compose(DiskMap.identity())


# ---------------------------------------------------------------- Cartan decomposition

def test_identity_has_zero_t():
    cc = cartan_decompose(DiskMap.identity())
    assert cc.t == 0.0 and cc.phi2 == math.pi


def test_rotation_reconstructs_at_zero_t():
    e = complex(math.cos(0.4), math.sin(0.4))
    g = DiskMap(np.array([[e, 0], [0, e.conjugate()]], dtype=complex), False)
    cc = cartan_decompose(g)
    assert cc.t == 0.0 and cc.phi2 == math.pi
    assert np.allclose(cartan_reconstruct(cc), g.m, atol=1e-15)


def test_pure_boost_coordinates():
    cc = cartan_decompose(DiskMap(a_matrix(2.5), False))
    assert cc.phi1 == pytest.approx(0.0, abs=1e-15)
    assert cc.t == pytest.approx(2.5, rel=1e-14)
    assert cc.phi2 == pytest.approx(math.pi, abs=1e-15)


def test_conjugating_map_rejected(cfg):
    with pytest.raises(GeometryDomainError):
        cartan_decompose(word_to_map(cfg, (1,)))


def _same_up_to_sign(a, b, tol):
    return min(np.abs(a - b).max(), np.abs(a + b).max()) <= tol * max(1.0, np.abs(a).max())


def test_reconstruction_of_rho1_rho2(cfg):
    g = word_to_map(cfg, (1, 2))
    assert _same_up_to_sign(cartan_reconstruct(cartan_decompose(g)), g.m, 1e-9)


def test_cartan_round_trip_random_even_words(cfg):
    rng = np.random.default_rng(7)
    for _ in range(200):
        w = random_reduced_word(rng, 2 * int(rng.integers(1, 7)))
        g = word_to_map(cfg, w)
        cc = cartan_decompose(g)
        assert cc.t >= 0.0
        assert _same_up_to_sign(cartan_reconstruct(cc), g.m, 1e-9)


# ---------------------------------------------------------------- curvature / tangency formulas

def test_curvature_at_zero_t_is_inverse_radius():
    for phi2, theta in ((0.3, 1.1), (math.pi, 0.0), (5.0, 2.0)):
        assert curvature_via_cartan(CartanCoords(0.0, 0.0, phi2), theta, 0.2) == pytest.approx(5.0, rel=1e-15)


def test_curvature_when_cosine_is_minus_one():
    t, r = 3.0, 0.1
    # pi - phi2 + theta = pi
    k = curvature_via_cartan(CartanCoords(0.7, t, 0.4), 0.4, r)
    assert k == pytest.approx(math.exp(-t) * (1 - r) / r + 1, rel=1e-14)


def test_curvature_of_rho1_rho2_matches_geometric_path(cfg):
    cc = cartan_decompose(word_to_map(cfg, (1, 2)))
    k_cartan = curvature_via_cartan(cc, 0.0, cfg.r0)
    step = reflect_tangent_circle(cfg.circles[0], reflect_tangent_circle(cfg.circles[1], cfg.base_circle))
    assert k_cartan == pytest.approx(step.kappa, rel=1e-9)


def test_tangency_at_zero_t_returns_theta():
    assert tangency_via_cartan(CartanCoords(0.0, 0.0, math.pi), 0.9) == pytest.approx(0.9, abs=1e-15)


def test_tangency_formula_against_exact_action_all_even_words(cfg):
    checked = 0
    for w in reduced_words_upto(12, even_only=True):
        g = word_to_map(cfg, w)
        cc = cartan_decompose(g)
        try:
            approx = tangency_via_cartan(cc, 0.0)
        except GeometryDomainError:
            continue
        checked += 1
        assert circ_dist(approx, g.apply_boundary(0.0)) <= 1e-6
    assert checked > 1000


def test_tangency_formula_long_word(cfg):
    w = (1, 2, 3, 1, 2, 3)
    g = word_to_map(cfg, w)
    assert circ_dist(tangency_via_cartan(cartan_decompose(g), 0.0), g.apply_boundary(0.0)) <= 1e-6


def test_tangency_converges_to_phi1_at_rate_e_minus_t():
    phi1, phi2, theta = 1.0, 2.0, 0.5
    err = [circ_dist(tangency_via_cartan(CartanCoords(phi1, t, phi2), theta), phi1) for t in (8.0, 10.0)]
    ratio = err[1] / err[0]
    assert math.exp(-2) / 3 <= ratio <= 3 * math.exp(-2)


def test_tangency_formula_flags_wrong_branch():
    # alpha near pi with small t: the image lies more than pi/2 from phi1
    with pytest.raises(GeometryDomainError):
        tangency_via_cartan(CartanCoords(0.0, 0.1, 0.05), 0.0)


def test_circle_through_collinear_rejected():
    with pytest.raises(GeometryDomainError):
        circle_through(0j, 1 + 0j, 2 + 0j)
