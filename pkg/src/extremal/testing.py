"""Random instance generators shared by the self-test suites and the test-suite."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .discs import make_rational_disc
from .domains import Annulus, Ball, Box, Polydisc
from .errors import DiscError
from .family import FamilyDiscParams
from .lelong import from_terms
from .weights import parse_weight


def crandn(rng, *shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_root(rng, inside: bool) -> complex:
    """A root with modulus in [0.05, 0.98] (inside) or [1.02, 3] (outside)."""
    rad = rng.uniform(0.05, 0.98) if inside else rng.uniform(1.02, 3.0)
    return rad * np.exp(2j * np.pi * rng.uniform())


def random_disc(rng, n: int = 1, degree: int | None = None, max_degree: int = 8):
    """Random rational disc whose f0 roots stay 0.02 away from the circle.

    ``f0`` gets a random number of roots inside the disc; the remaining
    components are random polynomials of the same degree.
    """
    for _ in range(100):
        d = degree if degree is not None else int(rng.integers(1, max_degree + 1))
        k_in = int(rng.integers(0, d + 1))
        rts = [random_root(rng, i < k_in) for i in range(d)]
        f0 = P.polyfromroots(rts) * (rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform()))
        comps = [f0] + [crandn(rng, d + 1) for _ in range(n)]
        try:
            return make_rational_disc(comps)
        except DiscError:
            continue
    raise RuntimeError("could not draw a valid random disc")


def random_lelong(rng, n: int = 1, degree: int | None = None, max_degree: int = 3):
    d = degree if degree is not None else int(rng.integers(0, max_degree + 1))
    if d == 0:
        from .lelong import constant_candidate

        return constant_candidate(rng.normal(), n)
    terms = {}
    for alpha in np.ndindex(*(d + 1,) * n):
        if sum(alpha) <= d:
            terms[alpha] = complex(crandn(rng))
    # keep the top degree present
    top = tuple([d] + [0] * (n - 1))
    terms[top] = terms.get(top, 0) + 1.0
    return from_terms(terms, n, d, "random").with_offset(rng.normal())


def double_crossing_disc(rng, n: int = 1):
    """Disc with ``f0 = c (zeta - a)^2 (zeta - b)``, ``|a| <= 0.9``, ``|b| >= 1.2``.

    Returns the disc and the double root a.
    """
    a = rng.uniform(0.2, 0.9) * np.exp(2j * np.pi * rng.uniform())
    b = rng.uniform(1.2, 3.0) * np.exp(2j * np.pi * rng.uniform())
    f0 = P.polyfromroots([a, a, b])
    comps = [f0] + [crandn(rng, 4) for _ in range(n)]
    return make_rational_disc(comps), a


def corpus_domains() -> list:
    """Small fixed domain corpus used across suites."""
    return [
        Ball(np.array([0j]), 1.0),
        Ball(np.zeros(2, complex), 1.0),
        Polydisc(np.array([0.5 + 0j]), np.array([1.5])),
        Box(np.array([[-1.0, 1.0]]), np.array([[-0.5, 0.5]])),
        Annulus(0j, 0.5, 2.0),
    ]


def corpus_weights(n: int) -> list:
    srcs = ["0", "re(z1)", "abs(z1)*abs(z1)", "max(re(z1), 0)", "log(1 + abs(z1))"]
    if n > 1:
        srcs += ["abs(z2) - im(z1)", "0.5*re(z1*z2)"]
    return [parse_weight(s) for s in srcs]


def point_outside(rng, X, min_gap: float = 0.1, max_norm: float = 3.0) -> np.ndarray:
    """A point at distance >= min_gap from X (checked by probing X's closure)."""
    n = X.dim
    c = X.center
    for _ in range(10_000):
        v = crandn(rng, n)
        z = c + v / np.linalg.norm(v) * rng.uniform(0.0, max_norm + X.scale)
        proj = X.project_closure(z)
        if X.contains(z) or np.linalg.norm(z - proj) < min_gap:
            continue
        return z
    raise RuntimeError("no outside point found")


def random_family_params(rng, X) -> FamilyDiscParams:
    """Feasible (z, w, r) with w sampled in X and z anywhere."""
    n = X.dim
    while True:
        w = X.sample(1, int(rng.integers(1 << 30)))[0]
        z = w + crandn(rng, n) * rng.uniform(0.1, 2.0)
        s = np.linalg.norm(z - w)
        d = float(X.boundary_distance(w))
        if s <= 0 or d <= 0:
            continue
        r = rng.uniform(0.05, 0.99) * min(s, d)
        return FamilyDiscParams(z, w, r)
