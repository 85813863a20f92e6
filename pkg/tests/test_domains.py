import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremal.domains import (
    Annulus,
    Ball,
    Box,
    FullSpace,
    Generic,
    Polydisc,
    boundary_distance,
    contains,
    domain_from_dict,
    sample_domain,
)
from extremal.errors import ConfigError, PointNotInDomain, SamplingFailure

BALL = Ball(np.array([0j]), 1.0)
ANN = Annulus(0j, 0.5, 2.0)

SHAPES = [
    BALL,
    Ball(np.array([0.5 + 0.5j, -1]), 2.0),
    Polydisc(np.array([0j, 1j]), np.array([1.0, 0.5])),
    Box(np.array([[-1.0, 2.0], [0.0, 1.0]]), np.array([[-0.5, 0.5], [-3.0, 3.0]])),
    ANN,
]


def test_membership_examples():
    assert contains(BALL, [0])
    assert not contains(BALL, [1])
    assert not contains(BALL, [1j])
    assert not contains(ANN, [0])


def test_distance_examples():
    assert boundary_distance(BALL, [0]) == 1.0
    assert boundary_distance(ANN, [1.25]) == pytest.approx(0.75)
    assert boundary_distance(FullSpace(2), [1, 1j]) == np.inf


def test_distance_outside_raises():
    with pytest.raises(PointNotInDomain):
        boundary_distance(ANN, [0])


def test_sampling_examples():
    pts = sample_domain(BALL, 4, seed=7)
    assert pts.shape == (4, 1) and np.all(np.abs(pts) < 1)
    assert np.array_equal(pts, sample_domain(BALL, 4, seed=7))
    a = np.abs(sample_domain(ANN, 100, seed=1))
    assert np.all((a > 0.5) & (a < 2))


@pytest.mark.parametrize("X", SHAPES, ids=lambda X: type(X).__name__)
def test_samples_inside_and_deterministic(X):
    pts = X.sample(500, seed=3)
    assert np.all(X.contains(pts))
    assert np.array_equal(pts, X.sample(500, seed=3))
    nb = X.sample_near_boundary(200, seed=3)
    assert np.all(X.contains(nb))
    assert np.all(X._distance(nb) < 1e-6)


@pytest.mark.parametrize("X", SHAPES, ids=lambda X: type(X).__name__)
def test_distance_ball_is_contained(X):
    # every point of B(w, d(w)(1 - 1e-12)) must lie in X
    rng = np.random.default_rng(0)
    for w in X.sample(20, seed=11):
        d = X.boundary_distance(w) * (1 - 1e-12)
        v = rng.normal(size=(1000, X.dim)) + 1j * rng.normal(size=(1000, X.dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        rad = d * rng.uniform(0, 1, (1000, 1)) ** (1 / (2 * X.dim))
        assert np.all(X.contains(w + rad * v))


@pytest.mark.parametrize("X", SHAPES, ids=lambda X: type(X).__name__)
def test_distance_is_attained(X):
    # slightly beyond d(w) some direction leaves X (closed form is exact, not just a bound)
    rng = np.random.default_rng(1)
    for w in X.sample(5, seed=2):
        d = X.boundary_distance(w)
        v = rng.normal(size=(20000, X.dim)) + 1j * rng.normal(size=(20000, X.dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        assert not np.all(X.contains(w + 1.05 * d * v))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_project_closure_idempotent(x, y):
    for X in SHAPES[:1] + SHAPES[4:]:
        p = X.project_closure(np.array([complex(x, y)]))
        assert np.allclose(X.project_closure(p), p)


def test_fullspace_sampling_is_gaussian_like():
    pts = FullSpace(2).sample(4096, seed=0)
    assert np.all(np.isfinite(pts))
    assert abs(np.mean(np.abs(pts) ** 2) - 1) < 0.05


def test_generic_domain():
    mem = lambda p: np.abs(p[:, 0] - 0.5) < 0.25
    dist = lambda p: 0.25 - np.abs(p[:, 0] - 0.5)
    X = Generic(1, mem, dist, (0.0, 1.0, -0.5, 0.5))
    pts = X.sample(50, seed=0)
    assert np.all(X.contains(pts))
    assert X.spot_check_connected()


def test_generic_sampling_failure():
    X = Generic(1, lambda p: np.zeros(len(p), bool), lambda p: np.zeros(len(p)), (0, 1, 0, 1))
    with pytest.raises(SamplingFailure):
        X.sample(1)


@pytest.mark.parametrize(
    "desc",
    [
        {"shape": "ball", "dim": 2, "center": [0, [1, 2]], "radius": 1.5},
        {"shape": "polydisc", "dim": 2, "radii": [1, 2]},
        {"shape": "box", "dim": 1, "re": [[-1, 1]], "im": [[0, 2]]},
        {"shape": "annulus", "r_in": 0.5, "r_out": 2},
        {"shape": "fullspace", "dim": 3},
    ],
)
def test_from_dict_round_trip(desc):
    X = domain_from_dict(desc)
    Y = domain_from_dict(X.to_dict())
    pts = X.sample(32, seed=5) if X.bounded else np.zeros((1, X.dim))
    assert np.array_equal(X.contains(pts), Y.contains(pts))


@pytest.mark.parametrize(
    "desc",
    [
        {"shape": "hexagon"},
        {"shape": "ball", "radius": -1},
        {"shape": "ball"},
        {"shape": "annulus", "dim": 2, "r_in": 0.5, "r_out": 2},
        {"shape": "ball", "dim": 2, "center": [0], "radius": 1},
    ],
)
def test_from_dict_errors(desc):
    with pytest.raises(ConfigError):
        domain_from_dict(desc)
