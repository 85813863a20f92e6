import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremal.discs import hyperplane_preimages, j_q
from extremal.domains import Annulus, Ball, Box, FullSpace, Polydisc
from extremal.errors import ConstraintViolation
from extremal.family import (
    CONSTANT_DISC,
    FamilyDiscParams,
    SearchConfig,
    envelope_batch,
    envelope_EB,
    family_disc,
    family_points,
    j_q_family,
)
from extremal.quadrature import QuadratureRule
from extremal.testing import corpus_domains, corpus_weights, random_family_params
from extremal.weights import parse_weight

BALL = Ball(np.array([0j]), 1.0)
ANN = Annulus(0j, 0.5, 2.0)
ZERO = parse_weight("0")
seeds = st.integers(0, 2**32 - 1)


def test_family_disc_center_and_circle():
    p = FamilyDiscParams([2.0], [0.0], 0.9)
    f = family_disc(p)
    pts, inf = f.affine(np.array([0j]))
    assert pts[0, 0] == pytest.approx(2.0)
    circ, _ = f.affine(QuadratureRule(64).nodes)
    assert np.allclose(np.abs(circ[:, 0]), 0.9, atol=1e-14)


def test_family_crossing_location():
    f = family_disc(FamilyDiscParams([2.0], [0.0], 0.9))
    (c,) = hyperplane_preimages(f)
    assert c.multiplicity == 1 and c.location == pytest.approx(-0.45, abs=1e-14)


def test_family_value_closed_form():
    assert j_q_family(FamilyDiscParams([2.0], [0.0], 0.9), ZERO) == pytest.approx(np.log(2 / 0.9), abs=1e-15)


@pytest.mark.parametrize(
    "z,w,r",
    [([1.0], [1.0], 0.5), ([2.0], [0.0], 1.5), ([2.0], [0.0], 0.0), ([0.5], [0.0], 0.6), ([2.0], [0.5], 0.6)],
)
def test_constraint_violations(z, w, r):
    with pytest.raises(ConstraintViolation):
        FamilyDiscParams(z, w, r).validate(BALL)


def test_w_outside_rejected():
    with pytest.raises(ConstraintViolation):
        FamilyDiscParams([3.0], [1.5], 0.1).validate(BALL)


@given(seeds)
def test_circle_lies_in_X(seed):
    rng = np.random.default_rng(seed)
    X = corpus_domains()[seed % 5]
    p = random_family_params(rng, X)
    pts = family_points(p.z, p.w, np.array(p.r), QuadratureRule(256).nodes)
    assert np.all(X.contains(pts))
    assert np.allclose(np.linalg.norm(pts - p.w, axis=-1), p.r, rtol=1e-12)


@given(seeds)
def test_closed_form_matches_generic(seed):
    rng = np.random.default_rng(seed)
    X = corpus_domains()[seed % 5]
    qs = corpus_weights(X.dim)
    q = qs[seed % len(qs)]
    p = random_family_params(rng, X)
    assert abs(j_q_family(p, q) - j_q(family_disc(p, X), q, X)) < 1e-10


def test_envelope_ball_outside():
    res = envelope_EB([2.0], BALL, ZERO)
    assert abs(res.value - np.log(2)) < 5e-3 and res.value >= np.log(2) - 1e-12


def test_envelope_annulus_center():
    res = envelope_EB([0.0], ANN, ZERO)
    assert res.value == pytest.approx(np.log(5 / 3), abs=5e-3)
    assert abs(abs(res.witness.w[0]) - 1.25) < 1e-2


def test_envelope_inside_at_most_q():
    q = parse_weight("re(z1) + 1")
    for z in [0.0, 0.5 + 0.2j, -0.9]:
        res = envelope_EB([z], BALL, q)
        assert res.value <= q(np.array([[z]]))[0] + 1e-15


def test_envelope_constant_witness_inside_for_q_zero():
    assert envelope_EB([0.3], BALL, ZERO).witness is CONSTANT_DISC


@pytest.mark.parametrize("X", [BALL, FullSpace(1), Box(np.array([[-1.0, 1.0]]), np.array([[-1.0, 1.0]]))],
                         ids=["ball", "full", "box"])
def test_envelope_finite_everywhere(X):
    for z in [0.0, 3.0, -5 + 5j]:
        assert np.isfinite(envelope_EB([z], X, parse_weight("abs(z1)")).value)


def test_minimal_growth_along_rays():
    # E_B J_q - log+||z|| stays bounded along ||z|| = 2^k
    q = parse_weight("abs(z1)")
    vals = []
    for k in range(0, 21, 4):
        z = 2.0**k * np.exp(0.3j)
        vals.append(envelope_EB([z], BALL, q, SearchConfig(starts=8, refine_steps=40)).value - k * np.log(2))
    assert max(vals) < 1.5


def test_batch_equals_single():
    Z = np.array([[2.0], [0.3j], [-1.5 + 0.5j]])
    q = parse_weight("re(z1)")
    cfg = SearchConfig(starts=8, refine_steps=40)
    batch = envelope_batch(Z, BALL, q, cfg)
    for z, b in zip(Z, batch):
        assert envelope_EB(z, BALL, q, cfg).value == b.value


def test_deterministic_given_seed():
    q = parse_weight("abs(z1)")
    a = envelope_EB([1.7], ANN, q, SearchConfig(seed=3))
    b = envelope_EB([1.7 + 0j], ANN, q, SearchConfig(seed=3))
    assert a.value == b.value


def test_constant_shift_exact():
    for X in corpus_domains():
        z = X.center + 2.5
        for c in [-2.0, 0.25, 7.0]:
            base = envelope_EB(z, X, ZERO).value
            shifted = envelope_EB(z, X, parse_weight(f"{c}")).value
            assert shifted - c == pytest.approx(base, abs=1e-12)


def test_monotone_in_q():
    q1, q2 = parse_weight("0"), parse_weight("abs(z1)*abs(z1)")
    for z in [0.2, 1.5, 3j]:
        assert envelope_EB([z], BALL, q1).value <= envelope_EB([z], BALL, q2).value + 1e-8


def test_polydisc_two_dims():
    X = Polydisc(np.zeros(2, complex), np.array([1.0, 1.0]))
    res = envelope_EB([2.0, 0.0], X, ZERO)
    # the line through z and the origin gives log 2
    assert res.value == pytest.approx(np.log(2), abs=5e-3)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(rho_cap=1.0)
    with pytest.raises(ValueError):
        SearchConfig(nodes=10)
