import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import polynomial as P

from extremal.discs import (
    AT_INFINITY,
    Q_MIN,
    blaschke_decompose,
    circle_mean,
    circle_mean_flagged,
    evaluate_disc,
    fundamental_inequality_check,
    hyperplane_preimages,
    j_functional,
    j_q,
    j_via_jensen,
    make_rational_disc,
)
from extremal.domains import Ball, FullSpace
from extremal.errors import CenterAtInfinity, CircleCrossesInfinity, CommonZeroOnDisc, DomainViolation
from extremal.family import FamilyDiscParams, family_disc
from extremal.lelong import constant_candidate, monomial
from extremal.quadrature import QuadratureRule
from extremal.testing import random_disc, random_lelong
from extremal.weights import parse_weight

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# construction


def test_identity_disc_is_valid():
    f = make_rational_disc([[1], [0, 1]])
    assert f.dim == 1 and f.degree == 1


def test_crossing_disc_is_valid():
    f = make_rational_disc([[-0.5, 1], [1]])
    assert j_functional(f) == pytest.approx(np.log(2))


def test_root_on_circle_rejected():
    with pytest.raises(CircleCrossesInfinity):
        make_rational_disc([[-1, 1], [1]])


def test_common_zero_rejected():
    with pytest.raises(CommonZeroOnDisc):
        make_rational_disc([[-0.5, 1], [-0.5, 1]])


def test_common_zero_outside_disc_is_fine():
    make_rational_disc([[-2, 1], [-2, 1], [1]])


@pytest.mark.parametrize("comps", [[[1]], [[0], [0]]])
def test_degenerate_component_lists(comps):
    with pytest.raises((ValueError, CircleCrossesInfinity)):
        make_rational_disc(comps)


# evaluation


def test_evaluate_identity_at_center():
    f = make_rational_disc([[1], [0, 1]])
    assert evaluate_disc(f, 0) == pytest.approx([0])


def test_evaluate_at_crossing_is_infinity():
    f = make_rational_disc([[-0.5, 1], [1]])
    assert evaluate_disc(f, 0.5) is AT_INFINITY


def test_evaluate_reciprocal():
    f = make_rational_disc([[-0.5, 1], [1]])
    assert evaluate_disc(f, 0) == pytest.approx([-2])


# crossings and J


def test_two_simple_crossings():
    f = make_rational_disc([P.polyfromroots([0.5, -0.5]), [1]])
    locs = sorted((c.location.real, c.multiplicity) for c in hyperplane_preimages(f))
    assert locs == [(-0.5, 1), (0.5, 1)]


def test_double_crossing_merges():
    f = make_rational_disc([P.polyfromroots([0.5, 0.5]), [1]])
    (c,) = hyperplane_preimages(f)
    assert c.multiplicity == 2 and abs(c.location - 0.5) < 1e-12
    assert j_functional(f) == pytest.approx(2 * np.log(2), abs=1e-12)


def test_root_outside_gives_no_crossing():
    f = make_rational_disc([[-2, 1], [1]])
    assert hyperplane_preimages(f) == [] and j_functional(f) == 0.0


def test_constant_disc_has_zero_J():
    f = make_rational_disc([[1], [0.3 + 0.1j]])
    assert j_functional(f) == 0.0


def test_crossing_at_center_gives_infinite_J():
    f = make_rational_disc([[0, 1], [1]])
    assert j_functional(f) == np.inf


@given(seeds)
def test_J_nonnegative(seed):
    f = random_disc(np.random.default_rng(seed))
    assert j_functional(f) >= 0


@given(seeds, st.floats(min_value=0, max_value=2 * np.pi))
def test_rotation_invariance(seed, theta):
    f = random_disc(np.random.default_rng(seed))
    assert abs(j_functional(f.rotated(theta)) - j_functional(f)) < 1e-9


# Jensen / Blaschke


def test_jensen_zero_free_is_zero():
    f = make_rational_disc([[2, 0.5], [1]])
    assert abs(j_via_jensen(f)) < 1e-12


def test_jensen_matches_log2():
    # 2 zeta - 1 has its root at 1/2; independent oracle: mean of log|2 zeta - 1| = log 2
    f = make_rational_disc([[-1, 2], [1]])
    assert j_via_jensen(f, QuadratureRule(512)) == pytest.approx(np.log(2), abs=1e-12)


def test_jensen_center_at_infinity_raises():
    f = make_rational_disc([[0, 1], [1]])
    with pytest.raises(CenterAtInfinity):
        j_via_jensen(f)


@given(seeds)
def test_jensen_random_degree5(seed):
    rng = np.random.default_rng(seed)
    rts = [0.9 * rng.uniform(0.1, 1) * np.exp(2j * np.pi * rng.uniform()) for _ in range(5)]
    f = make_rational_disc([P.polyfromroots(rts), [1]])
    assert abs(j_functional(f) - j_via_jensen(f)) < 1e-8


def test_blaschke_trivial():
    dec = blaschke_decompose([1])
    assert dec.crossings == () and dec.outer_value_at_zero == 0.0


def test_blaschke_simple_root():
    dec = blaschke_decompose([-0.5, 1])
    assert len(dec.crossings) == 1 and dec.crossings[0].location == pytest.approx(0.5)
    assert dec.outer_value_at_zero == pytest.approx(0.0, abs=1e-14)


def test_blaschke_outer_value_by_quadrature():
    dec = blaschke_decompose([-1, 2])
    rule = QuadratureRule(1024)
    direct = rule.mean(np.log(np.abs(2 * rule.nodes - 1)))
    assert dec.outer_value_at_zero == pytest.approx(np.log(2), abs=1e-12)
    assert direct == pytest.approx(dec.outer_value_at_zero, abs=1e-12)


@given(seeds)
def test_blaschke_reassembly_and_modulus(seed):
    f = random_disc(np.random.default_rng(seed))
    dec = blaschke_decompose(f.f0)
    z = QuadratureRule(128).nodes
    ref = P.polyval(z, f.f0)
    assert np.max(np.abs(dec.reassemble(z) - ref)) <= 1e-8 * np.max(np.abs(ref))
    assert np.allclose(np.abs(dec.blaschke(z)), 1.0, atol=1e-12)


# circle means and J_q


def test_circle_mean_constant():
    f = make_rational_disc([[1], [0.2, 0.5]])
    assert circle_mean(lambda p: np.full(p.shape[:-1], 3.0), f) == pytest.approx(3.0)


def test_circle_mean_harmonic():
    f = make_rational_disc([[1], [0.3 - 0.2j, 0.7]])
    assert circle_mean(lambda p: p[..., 0].real, f, QuadratureRule(64)) == pytest.approx(0.3, abs=1e-14)


def test_circle_mean_modulus_squared():
    f = make_rational_disc([[1], [0, 0.6]])
    assert circle_mean(lambda p: np.abs(p[..., 0]) ** 2, f, QuadratureRule(64)) == pytest.approx(0.36)


@given(seeds)
def test_harmonic_polynomial_mean_value(seed):
    # Re of a holomorphic polynomial composed with a pole-free disc
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
    f = make_rational_disc([[1], rng.normal(size=3) + 1j * rng.normal(size=3)])
    phi = lambda p: np.real(P.polyval(p[..., 0], coeffs))
    center = phi(evaluate_disc(f, 0)[None, :])[0]
    assert abs(circle_mean(phi, f, QuadratureRule(64)) - center) < 1e-10


def test_circle_mean_clips_and_flags():
    f = make_rational_disc([[1], [0, 1]])
    val, flag = circle_mean_flagged(lambda p: np.where(p[..., 0].real > 0.99, -np.inf, 0.0), f, QuadratureRule(8))
    assert flag and val == pytest.approx(Q_MIN / 8)


def test_circle_mean_domain_violation():
    f = make_rational_disc([[1], [0, 2]])
    with pytest.raises(DomainViolation):
        circle_mean(lambda p: p[..., 0].real, f, QuadratureRule(8), domain=Ball(np.array([0j]), 1.0))


def test_jq_constant_disc_is_q():
    X = Ball(np.array([0j]), 1.0)
    q = parse_weight("re(z1) + 2")
    f = make_rational_disc([[1], [0.25]])
    assert j_q(f, q, X) == pytest.approx(2.25)


def test_jq_family_q_zero_and_constant():
    X = Ball(np.array([0j]), 1.0)
    p = FamilyDiscParams([2.0], [0.0], 0.9)
    f = family_disc(p, X)
    assert j_q(f, parse_weight("0"), X) == pytest.approx(np.log(2 / 0.9), abs=1e-12)
    assert j_q(f, parse_weight("1.5"), X) == pytest.approx(np.log(2 / 0.9) + 1.5, abs=1e-12)


def test_jq_infinite_J_wins():
    f = make_rational_disc([[0, 1], [1]])
    assert j_q(f, parse_weight("-1000"), FullSpace(1)) == np.inf


def test_jq_ignores_nodes_outside_X():
    # the identity disc hits |z| = 1, outside the ball of radius 0.5: integral empty, J = 0
    f = make_rational_disc([[1], [0, 1]])
    assert j_q(f, parse_weight("5"), Ball(np.array([0j]), 0.5), QuadratureRule(16)) == 0.0


# fundamental inequality


def test_fundamental_equality_case():
    u = monomial((1,), [0])
    for z, r in [(2.0, 0.9), (3 + 1j, 0.5), (-1.5j, 0.99)]:
        f = family_disc(FamilyDiscParams([z], [0], r))
        assert abs(fundamental_inequality_check(u, f)) < 1e-9


def test_fundamental_constant_without_crossings():
    f = make_rational_disc([[1], [0.1, 0.4, 0.2]])
    assert abs(fundamental_inequality_check(constant_candidate(0.7, 1), f)) < 1e-12


@given(seeds)
def test_fundamental_cubic_on_family(seed):
    rng = np.random.default_rng(seed)
    u = random_lelong(rng, 1, 3)
    z = rng.normal() + 1j * rng.normal()
    w = rng.normal() + 1j * rng.normal()
    r = rng.uniform(0.05, 0.95) * abs(z - w)
    f = family_disc(FamilyDiscParams([z], [w], r))
    assert fundamental_inequality_check(u, f) >= -1e-6


def test_fundamental_center_at_infinity():
    f = make_rational_disc([[0, 1], [1]])
    with pytest.raises(CenterAtInfinity):
        fundamental_inequality_check(monomial((1,), [0]), f)


def test_fundamental_without_lift_uses_values():
    f = make_rational_disc([[1], [0.5, 0.3]])
    u = lambda p: np.log(np.abs(p[..., 0]))
    assert fundamental_inequality_check(u, f) >= -1e-9
