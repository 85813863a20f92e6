"""Invariant suites run by ``extremal selftest``.

Each suite draws seeded random instances, checks one identity or
inequality, and reports the worst deviation against its tolerance.
``inject`` names a suite whose tolerance is replaced by an impossible
one, which lets callers check that failures propagate to the exit code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .discs import (
    blaschke_decompose,
    fundamental_inequality_check,
    hyperplane_preimages,
    j_functional,
    j_q,
    j_via_jensen,
    make_rational_disc,
)
from .domains import Annulus, Ball, FullSpace
from .errors import ConstraintViolation
from .family import FamilyDiscParams, SearchConfig, envelope_batch, family_disc, j_q_family
from .lelong import homogenization_check
from .quadrature import QuadratureRule
from .solver import Solver, SolverConfig
from .testing import (
    corpus_domains,
    corpus_weights,
    double_crossing_disc,
    point_outside,
    random_disc,
    random_family_params,
    random_lelong,
)
from .weights import parse_weight

IMPOSSIBLE = -1.0


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    cases: int

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.1e} cases={self.cases}"


def _result(name, devs, tol, inject, cases=None):
    worst = float(np.max(devs)) if len(devs) else 0.0
    tol = IMPOSSIBLE if inject == name else tol
    return SuiteResult(name, bool(worst <= tol), worst, tol, cases if cases is not None else len(devs))


def suite_jensen(rng, size, inject=None):
    rule = QuadratureRule(1024)
    devs = []
    for _ in range(size):
        f = random_disc(rng, n=int(rng.integers(1, 3)))
        devs.append(abs(j_functional(f) - j_via_jensen(f, rule)))
    return _result("jensen", devs, 1e-6, inject)


def suite_blaschke(rng, size, inject=None):
    """Reassembly ``B * g0 = f0`` on the circle and ``log|g0(0)| = log|f0(0)| + J``."""
    zeta = QuadratureRule(256).nodes
    devs = []
    for _ in range(size):
        f = random_disc(rng)
        dec = blaschke_decompose(f.f0)
        scale = np.max(np.abs(P.polyval(zeta, f.f0)))
        devs.append(np.max(np.abs(dec.reassemble(zeta) - P.polyval(zeta, f.f0))) / scale)
        devs.append(abs(dec.outer_value_at_zero - (np.log(abs(f.f0[0])) + j_functional(f))))
    return _result("blaschke", devs, 1e-8, inject, size)


def suite_fundamental(rng, size, inject=None):
    devs = []
    for _ in range(size):
        n = int(rng.integers(1, 3))
        u = random_lelong(rng, n)
        f = random_disc(rng, n=n, max_degree=4)
        devs.append(max(0.0, -fundamental_inequality_check(u, f)))
    return _result("fundamental_inequality", devs, 1e-6, inject)


def suite_homogenization(rng, size, inject=None):
    devs = [homogenization_check(random_lelong(rng, int(rng.integers(1, 3)), 3), trials=50,
                                 seed=int(rng.integers(1 << 30))) for _ in range(size)]
    return _result("homogenization", devs, 1e-6, inject)


def suite_family(rng, size, inject=None):
    devs = []
    doms = corpus_domains()
    for _ in range(size):
        X = doms[int(rng.integers(len(doms)))]
        qs = corpus_weights(X.dim)
        q = qs[int(rng.integers(len(qs)))]
        p = random_family_params(rng, X)
        f = family_disc(p, X)
        devs.append(abs(j_q_family(p, q) - j_q(f, q, X)))
        crossings = hyperplane_preimages(f)
        devs.append(abs(crossings[0].location + p.r / p.s) if len(crossings) == 1 else np.inf)
    return _result("family_closed_form", devs, 1e-10, inject, size)


def suite_witness_stability(rng, size, inject=None):
    devs = []
    doms = corpus_domains()
    search = SearchConfig(starts=8, refine_steps=60)
    for _ in range(size):
        X = doms[int(rng.integers(len(doms)))]
        qs = corpus_weights(X.dim)
        q = qs[int(rng.integers(len(qs)))]
        z0 = point_outside(rng, X)
        res = envelope_batch(z0[None], X, q, search)[0]
        p0 = res.witness
        v = rng.normal(size=X.dim) + 1j * rng.normal(size=X.dim)
        z = z0 + 1e-3 * p0.r * v / np.linalg.norm(v)
        p = FamilyDiscParams(z, p0.w, p0.r)
        try:
            p.validate(X)
        except ConstraintViolation:
            devs.append(np.inf)
            continue
        devs.append(max(0.0, j_q_family(p, q) - res.value))
    return _result("witness_stability", devs, 1e-2, inject)


def suite_simple_zero(rng, size, inject=None):
    devs = []
    for _ in range(size):
        f, a = double_crossing_disc(rng)
        comps = [np.array(c) for c in f.components]
        comps[0] = comps[0].copy()
        comps[0][0] += 1e-8 * np.exp(2j * np.pi * rng.uniform())
        g = make_rational_disc(comps)
        ok = len(hyperplane_preimages(f)) == 1 and len(hyperplane_preimages(g)) == 2
        devs.append(abs(j_functional(g) - j_functional(f)) if ok else np.inf)
    return _result("simple_zero_perturbation", devs, 1e-3, inject)


def suite_sandwich(rng, size, inject=None):
    """Sandwich invariant and closed-form values on a small corpus."""
    zero = parse_weight("0")
    cfg = SolverConfig(calib_samples=1024)
    cases = [
        (Ball(np.array([0j]), 1.0), np.array([2.0 + 0j]), np.log(2.0)),
        (Ball(np.array([0j]), 1.0), np.array([0.3j]), 0.0),
        (Annulus(0j, 0.5, 2.0), np.array([0j]), 0.0),
        (FullSpace(1), np.array([1 + 1j]), 0.0),
    ]
    devs = []
    for X, z, ref in cases[: max(size, 1)]:
        rep = Solver(X, zero, cfg).solve(z)
        devs.append(0.0 if rep.sandwich_ok else np.inf)
        # excess over the 0.02 closed-form allowance
        devs.append(max(0.0, abs(rep.poletsky_upper - ref) - 0.02))
    return _result("sandwich_corpus", devs, 0.0, inject, len(cases[: max(size, 1)]))


SUITES = {
    "jensen": (suite_jensen, 100),
    "blaschke": (suite_blaschke, 50),
    "fundamental_inequality": (suite_fundamental, 200),
    "homogenization": (suite_homogenization, 10),
    "family_closed_form": (suite_family, 50),
    "witness_stability": (suite_witness_stability, 20),
    "simple_zero_perturbation": (suite_simple_zero, 20),
    "sandwich_corpus": (suite_sandwich, 4),
}


def run_selftest(seed: int = 0, inject: str | None = None, scale: float = 1.0,
                 only=None) -> list[SuiteResult]:
    """Run all suites (or ``only``) with a per-suite generator from ``seed``."""
    out = []
    for k, (name, (fn, size)) in enumerate(SUITES.items()):
        if only and name not in only:
            continue
        rng = np.random.default_rng([seed, k])
        out.append(fn(rng, max(1, int(round(size * scale))), inject))
    return out
