"""Closed analytic discs in projective space and the disc functionals.

A disc ``f = [f0 : f1 : ... : fn]`` is stored through its polynomial lift
``(f0, ..., fn)``; coefficient lists are ordered constant term first.
Affine coordinates are ``fj / f0`` and the hyperplane at infinity is the
zero set of ``f0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import polyroots
from .errors import (
    CenterAtInfinity,
    CircleCrossesInfinity,
    CommonZeroOnDisc,
    DomainViolation,
)
from .quadrature import QuadratureRule, adaptive_mean

TOL_COMMON = 1e-10
TOL_CIRCLE = 1e-9
ZERO_FLOOR = 1e-300
Q_MIN = -1e6
CIRCLE_CHECK_SAMPLES = 4096


class _AtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AT_INFINITY"


AT_INFINITY = _AtInfinity()


def as_point(z) -> np.ndarray:
    """Coerce a scalar or sequence to a finite 1-D complex coordinate array."""
    p = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if p.size < 1:
        raise ValueError("a point needs at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite coordinates: {p}")
    return p


@dataclass(frozen=True)
class HyperplaneCrossing:
    location: complex
    multiplicity: int

    def __post_init__(self):
        if not abs(self.location) < 1:
            raise ValueError("crossing must lie in the open unit disc")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")


@dataclass(frozen=True, eq=False)
class RationalDisc:
    """Validated closed disc ``zeta -> [f0(zeta) : ... : fn(zeta)]``.

    Build with :func:`make_rational_disc`; ``components`` has shape
    ``(n + 1, degree + 1)``.
    """

    components: np.ndarray

    @property
    def dim(self) -> int:
        return self.components.shape[0] - 1

    @property
    def degree(self) -> int:
        return max(len(polyroots.trim(c)) - 1 for c in self.components)

    @property
    def f0(self) -> np.ndarray:
        return self.components[0]

    def lift(self, zeta) -> np.ndarray:
        """Values of the lift at ``zeta``; shape ``zeta.shape + (n + 1,)``."""
        zeta = np.asarray(zeta, dtype=complex)
        vals = [P.polyval(zeta, c) for c in self.components]
        return np.stack(vals, axis=-1)

    def affine(self, zeta) -> tuple[np.ndarray, np.ndarray]:
        """Affine images and an at-infinity mask."""
        lifted = self.lift(zeta)
        f0 = lifted[..., 0]
        scale = np.max(np.abs(lifted), axis=-1)
        inf_mask = np.abs(f0) <= TOL_CIRCLE * np.maximum(scale, 1e-300)
        with np.errstate(invalid="ignore", divide="ignore"):
            pts = lifted[..., 1:] / f0[..., None]
        return pts, inf_mask

    def rotated(self, theta: float) -> "RationalDisc":
        """The disc ``zeta -> f(exp(i theta) zeta)``."""
        k = np.arange(self.components.shape[1])
        return make_rational_disc(self.components * np.exp(1j * theta * k))

    def with_f0(self, coeffs) -> "RationalDisc":
        comps = [np.asarray(coeffs, dtype=complex)] + list(self.components[1:])
        return make_rational_disc(comps)

    def __eq__(self, other):
        if not isinstance(other, RationalDisc):
            return NotImplemented
        return self.components.shape == other.components.shape and bool(
            np.all(self.components == other.components)
        )

    __hash__ = None


def make_rational_disc(components: Sequence) -> RationalDisc:
    """Validate coefficient lists and build a :class:`RationalDisc`.

    Raises
    ------
    CommonZeroOnDisc
        If all components vanish at one point of the closed unit disc.
    CircleCrossesInfinity
        If ``f0`` vanishes somewhere on the unit circle.
    """
    comps = [np.atleast_1d(np.asarray(c, dtype=complex)) for c in components]
    if len(comps) < 2:
        raise ValueError("a disc in P^n needs at least two components")
    if not all(np.all(np.isfinite(c)) for c in comps):
        raise ValueError("non-finite coefficient")
    if all(np.all(c == 0) for c in comps):
        raise ValueError("all components are identically zero")
    width = max(len(c) for c in comps)
    arr = np.zeros((len(comps), width), dtype=complex)
    for j, c in enumerate(comps):
        arr[j, : len(c)] = c
    arr.flags.writeable = False

    f0 = arr[0]
    if np.all(f0 == 0):
        raise CircleCrossesInfinity("f0 is identically zero")

    # common zeros can only sit at zeros of f0
    r0 = polyroots.roots(f0)
    for a in r0[np.abs(r0) <= 1 + TOL_COMMON]:
        vals = np.array([abs(P.polyval(a, c)) for c in arr])
        bounds = np.array([P.polyval(abs(a), np.abs(c)) for c in arr])
        if np.all(vals <= TOL_COMMON * np.maximum(bounds, 1.0)):
            raise CommonZeroOnDisc(f"all components vanish near zeta={a:.6g}")

    if np.any(np.abs(np.abs(r0) - 1.0) <= TOL_CIRCLE):
        raise CircleCrossesInfinity("f0 has a root on the unit circle")
    theta = np.exp(2j * np.pi * np.arange(CIRCLE_CHECK_SAMPLES) / CIRCLE_CHECK_SAMPLES)
    if np.min(np.abs(P.polyval(theta, f0))) <= TOL_CIRCLE:
        raise CircleCrossesInfinity("|f0| falls below tolerance on the unit circle")
    return RationalDisc(arr)


def evaluate_disc(f: RationalDisc, zeta: complex):
    """Affine image of ``zeta``, or ``AT_INFINITY``."""
    if abs(zeta) > 1 + 1e-12:
        raise ValueError("zeta must lie in the closed unit disc")
    pts, inf_mask = f.affine(np.array([zeta]))
    if inf_mask[0]:
        return AT_INFINITY
    return pts[0]


def hyperplane_preimages(f: RationalDisc) -> list[HyperplaneCrossing]:
    """Zeros of ``f0`` in the open unit disc with their multiplicities."""
    z = polyroots.roots(f.f0)
    return [
        HyperplaneCrossing(a, m)
        for a, m in polyroots.cluster(z, coeffs=f.f0)
        if abs(a) < 1
    ]


def j_functional(f: RationalDisc) -> float:
    """``-sum m log|a|`` over the crossings with the hyperplane at infinity."""
    f0 = polyroots.trim(f.f0)
    if abs(f0[0]) <= ZERO_FLOOR * np.max(np.abs(f0)):
        return np.inf
    total = 0.0
    for c in hyperplane_preimages(f):
        if abs(c.location) <= ZERO_FLOOR:
            return np.inf
        total -= c.multiplicity * np.log(abs(c.location))
    return float(total)


def j_via_jensen(f: RationalDisc, rule: QuadratureRule | None = None) -> float:
    """J computed from circle means: ``mean log|f0| - log|f0(0)|``."""
    rule = rule or QuadratureRule(1024)
    c0 = f.f0[0]
    if abs(c0) <= ZERO_FLOOR:
        raise CenterAtInfinity("f0(0) = 0")
    vals = np.log(np.abs(P.polyval(rule.nodes, f.f0)))
    return float(rule.mean(vals) - np.log(abs(c0)))


def clip_low(values):
    """Clip values below ``Q_MIN`` (including -inf); return (values, clipped)."""
    v = np.asarray(values, dtype=float)
    low = v < Q_MIN
    if np.any(low):
        return np.where(low, Q_MIN, v), True
    return v, False


def _node_images(f: RationalDisc, zeta, domain):
    pts, inf_mask = f.affine(zeta)
    if np.any(inf_mask):
        raise DomainViolation("a boundary node maps to the hyperplane at infinity")
    if domain is not None and not np.all(domain.contains(pts)):
        raise DomainViolation("a boundary node maps outside the domain")
    return pts


def circle_mean_flagged(
    phi: Callable[[np.ndarray], np.ndarray],
    f: RationalDisc,
    rule: QuadratureRule | None = None,
    domain=None,
) -> tuple[float, bool]:
    """Circle mean of ``phi o f`` and whether any value was clipped.

    With ``rule=None`` the node count is doubled from 256 until two
    successive means agree to 1e-8 (capped at 8192 nodes).
    """
    clipped = False

    def integrand(zeta):
        nonlocal clipped
        vals, c = clip_low(phi(_node_images(f, zeta, domain)))
        clipped |= c
        return vals

    if rule is None:
        value, _, _ = adaptive_mean(integrand)
    else:
        value = float(rule.mean(integrand(rule.nodes)))
    return value, clipped


def circle_mean(phi, f: RationalDisc, rule: QuadratureRule | None = None, domain=None) -> float:
    return circle_mean_flagged(phi, f, rule, domain)[0]


def j_q_flagged(f: RationalDisc, q, X, rule: QuadratureRule | None = None) -> tuple[float, bool]:
    """``J(f)`` plus the mean of ``q`` over the nodes whose images lie in X.

    Nodes outside X contribute nothing (the measure is not renormalized).
    ``+inf`` from J dominates whatever the integral is.
    """
    j = j_functional(f)
    if np.isinf(j):
        return np.inf, False
    clipped = False

    def integrand(zeta):
        nonlocal clipped
        pts, inf_mask = f.affine(zeta)
        inside = ~inf_mask & X.contains(np.where(inf_mask[..., None], 0, pts))
        out = np.zeros(pts.shape[:-1])
        if np.any(inside):
            vals, c = clip_low(q(pts[inside]))
            clipped |= c
            out[inside] = vals
        return out

    if rule is None:
        mean, _, _ = adaptive_mean(integrand)
    else:
        mean = float(rule.mean(integrand(rule.nodes)))
    return j + mean, clipped


def j_q(f: RationalDisc, q, X, rule: QuadratureRule | None = None) -> float:
    return j_q_flagged(f, q, X, rule)[0]


@dataclass(frozen=True)
class BlaschkeDecomposition:
    """``f0 = prod ((zeta - a) / (1 - conj(a) zeta))**m * g0``.

    ``outer_coeffs`` holds the zero-free (on the closed disc) factor g0.
    """

    crossings: tuple
    outer_value_at_zero: float
    outer_coeffs: np.ndarray

    def blaschke(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.ones_like(zeta)
        for c in self.crossings:
            a = c.location
            out = out * ((zeta - a) / (1 - np.conj(a) * zeta)) ** c.multiplicity
        return out

    def reassemble(self, zeta):
        return self.blaschke(zeta) * P.polyval(np.asarray(zeta, dtype=complex), self.outer_coeffs)


def blaschke_decompose(f0_coeffs) -> BlaschkeDecomposition:
    """Split ``f0`` into a finite Blaschke product and a zero-free factor."""
    c = polyroots.trim(f0_coeffs)
    z = polyroots.roots(c)
    crossings = []
    outside = []
    for a, m in polyroots.cluster(z, coeffs=c):
        if abs(a) < 1:
            crossings.append(HyperplaneCrossing(a, m))
        else:
            outside.extend([a] * m)
    g0 = np.array([c[-1]], dtype=complex)
    for cr in crossings:
        for _ in range(cr.multiplicity):
            g0 = P.polymul(g0, [1.0, -np.conj(cr.location)])
    for b in outside:
        g0 = P.polymul(g0, [-b, 1.0])
    # log|g0(0)| = log|lead| + sum log|b|; equals log|f0(0)| - sum m log|a|
    outer = float(np.log(abs(c[-1])) + sum(np.log(abs(b)) for b in outside))
    g0 = np.asarray(g0, dtype=complex)
    g0.flags.writeable = False
    return BlaschkeDecomposition(tuple(crossings), outer, g0)


def fundamental_inequality_check(u, f: RationalDisc, rule: QuadratureRule | None = None) -> float:
    """Residual ``J(f) + mean(u o f) - u(f(0))``; non-negative for u in the Lelong class.

    ``u`` is evaluated through its homogeneous lift when it provides one
    (``u.lift``), which stays accurate where ``f`` approaches infinity.
    """
    pts0, inf0 = f.affine(np.array([0j]))
    if inf0[0]:
        raise CenterAtInfinity("f(0) lies on the hyperplane at infinity")
    J = j_functional(f)

    lift = getattr(u, "lift", None)
    if lift is not None:

        def integrand(zeta):
            tilde = f.lift(zeta)
            return lift(tilde) - np.log(np.abs(tilde[..., 0]))

    else:

        def integrand(zeta):
            return u(_node_images(f, zeta, None))

    if rule is None:
        mean, _, _ = adaptive_mean(integrand)
    else:
        mean = float(rule.mean(integrand(rule.nodes)))
    at_center = float(np.asarray(u(pts0))[0])
    if at_center == -np.inf:
        return np.inf
    return float(J + mean - at_center)
