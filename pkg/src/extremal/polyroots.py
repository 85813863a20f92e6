"""Polynomial roots and root clustering.

Coefficient arrays are ordered constant term first throughout.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import RootFindingFailure

COMPANION_MAX_DEGREE = 30
RESIDUAL_TOL = 1e-10
CLUSTER_RADIUS = 1e-6


def trim(coeffs, rel_tol: float = 1e-14) -> np.ndarray:
    """Drop negligible leading (highest-degree) coefficients."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return c[:1] * 0
    keep = np.nonzero(np.abs(c) > rel_tol * scale)[0]
    return c[: keep[-1] + 1]


def backward_error(coeffs, z) -> np.ndarray:
    """Relative residual |p(z)| / sum_k |c_k| |z|^k."""
    c = np.asarray(coeffs, dtype=complex)
    z = np.asarray(z, dtype=complex)
    num = np.abs(P.polyval(z, c))
    den = P.polyval(np.abs(z), np.abs(c))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / den, num)


def _aberth(c: np.ndarray, maxiter: int = 500) -> np.ndarray:
    deg = len(c) - 1
    mono = c / c[-1]
    radius = 1.0 + np.max(np.abs(mono[:-1]))
    z = radius * 0.5 * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg)
    dc = P.polyder(c)
    for _ in range(maxiter):
        ratio = P.polyval(z, c) / P.polyval(z, dc)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        step = ratio / (1.0 - ratio * np.sum(1.0 / diff, axis=1))
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))):
            break
    return z


def _polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    dc = P.polyder(c)
    best = z.copy()
    err = backward_error(c, best)
    for _ in range(steps):
        d = P.polyval(best, dc)
        with np.errstate(invalid="ignore", divide="ignore"):
            trial = best - P.polyval(best, c) / d
        ok = np.isfinite(trial)
        terr = np.where(ok, backward_error(c, np.where(ok, trial, best)), np.inf)
        better = terr < err
        best = np.where(better, trial, best)
        err = np.where(better, terr, err)
    return best


def roots(coeffs) -> np.ndarray:
    """All complex roots of a polynomial, with multiplicity.

    Companion-matrix eigenvalues up to degree 30, Aberth-Ehrlich
    iteration above; every root is Newton-polished and checked against
    a relative residual of 1e-10.

    Raises
    ------
    RootFindingFailure
        If a root does not meet the residual bound, or the polynomial is
        identically zero.
    """
    c = trim(coeffs)
    if np.all(c == 0):
        raise RootFindingFailure("zero polynomial has no finite root set")
    deg = len(c) - 1
    if deg == 0:
        return np.empty(0, dtype=complex)
    if deg <= COMPANION_MAX_DEGREE:
        z = P.polyroots(c)
    else:
        z = _aberth(c)
    z = _polish(c, np.asarray(z, dtype=complex))
    err = backward_error(c, z)
    if not np.all(err < RESIDUAL_TOL):
        raise RootFindingFailure(
            f"root residual {np.max(err):.3e} exceeds {RESIDUAL_TOL:g}"
        )
    return z


def _refine_multiple(c: np.ndarray, a: complex, m: int) -> complex:
    # a root of multiplicity m is a simple root of the (m-1)-th derivative
    d = P.polyder(c, m - 1)
    dd = P.polyder(d)
    best, err = a, abs(P.polyval(a, d))
    for _ in range(4):
        slope = P.polyval(best, dd)
        if slope == 0:
            break
        trial = best - P.polyval(best, d) / slope
        terr = abs(P.polyval(trial, d))
        if not terr < err or abs(trial - a) > CLUSTER_RADIUS:
            break
        best, err = trial, terr
    return complex(best)


def cluster(z, radius: float = CLUSTER_RADIUS, coeffs=None) -> list[tuple[complex, int]]:
    """Merge roots closer than ``radius`` (single linkage).

    Returns ``(representative, multiplicity)`` pairs, the representative
    being the cluster mean, sorted by modulus then argument. When the
    polynomial ``coeffs`` is given, representatives of multiple roots are
    sharpened by Newton steps on the matching derivative.
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idx in groups.values():
        a = complex(np.mean(z[idx]))
        if coeffs is not None and len(idx) > 1:
            a = _refine_multiple(trim(coeffs), a, len(idx))
        out.append((a, len(idx)))
    out.sort(key=lambda t: (abs(t[0]), np.angle(t[0])))
    return out
