"""Open connected sets X in C^n: membership, boundary distance, sampling.

All methods accept point arrays of shape ``(..., n)`` and are vectorized
over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm, qmc

from .discs import as_point
from .errors import ConfigError, PointNotInDomain, SamplingFailure

MAX_REJECTION_ATTEMPTS = 10**6


def _pts(points) -> np.ndarray:
    return np.asarray(points, dtype=complex)


def _halton(k: int, d: int, seed: int) -> np.ndarray:
    u = qmc.Halton(d=d, scramble=True, seed=seed).random(k)
    return np.clip(u, 1e-12, 1 - 1e-12)


def _ball_directions(u: np.ndarray) -> np.ndarray:
    """Map uniform cube samples (k, 2n) to unit vectors in C^n."""
    g = norm.ppf(u)
    n = g.shape[1] // 2
    v = g[:, :n] + 1j * g[:, n:]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class Domain:
    """Base class; subclasses implement the closed-form geometry."""

    dim: int
    bounded = True
    connected = True
    closed_form_closure = False

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def _distance(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, w) -> np.ndarray | float:
        """Euclidean distance from interior points to the boundary.

        Raises
        ------
        PointNotInDomain
            If any point is not in the (open) domain.
        """
        pts = _pts(w)
        if not np.all(self.contains(pts)):
            raise PointNotInDomain("boundary distance requested outside the domain")
        d = self._distance(pts)
        return float(d) if np.ndim(d) == 0 else d

    def distance_or_zero(self, pts) -> np.ndarray:
        """Boundary distance inside, 0 outside (no membership error)."""
        pts = _pts(pts)
        inside = self.contains(pts)
        d = self._distance(pts)
        return np.where(inside, d, 0.0)

    def sample(self, k: int, seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def sample_near_boundary(self, k: int, seed: int = 0, depth: float = 1e-9) -> np.ndarray:
        """Interior points within about ``depth`` of the boundary."""
        return self.sample(k, seed)

    def project_closure(self, pts) -> np.ndarray:
        """Map arbitrary points into the closure of X (identity inside)."""
        return _pts(pts)

    @property
    def center(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        """Characteristic size, used to seed step lengths and disc radii."""
        return 1.0

    def to_dict(self) -> dict:
        raise NotImplementedError


def _c(z) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(z)]


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    center_: np.ndarray
    radius: float
    closed_form_closure = True

    def __post_init__(self):
        object.__setattr__(self, "center_", np.atleast_1d(np.asarray(self.center_, dtype=complex)))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return len(self.center_)

    @property
    def center(self):
        return self.center_

    @property
    def scale(self):
        return float(self.radius)

    def contains(self, points):
        return np.linalg.norm(_pts(points) - self.center_, axis=-1) < self.radius

    def _distance(self, pts):
        return self.radius - np.linalg.norm(pts - self.center_, axis=-1)

    def sample(self, k, seed=0):
        n = self.dim
        u = _halton(k, 2 * n + 1, seed)
        dirs = _ball_directions(u[:, : 2 * n])
        rad = self.radius * u[:, 2 * n] ** (1.0 / (2 * n))
        return self.center_ + rad[:, None] * dirs

    def sample_near_boundary(self, k, seed=0, depth=1e-9):
        u = _halton(k, 2 * self.dim, seed + 7919)
        dirs = _ball_directions(u)
        return self.center_ + self.radius * (1 - depth) * dirs

    def project_closure(self, pts):
        pts = _pts(pts)
        v = pts - self.center_
        r = np.linalg.norm(v, axis=-1, keepdims=True)
        fac = np.where(r > self.radius, self.radius / np.where(r > 0, r, 1), 1.0)
        return self.center_ + v * fac

    def to_dict(self):
        return {"shape": "ball", "dim": self.dim, "center": _c(self.center_), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Polydisc(Domain):
    center_: np.ndarray
    radii: np.ndarray
    closed_form_closure = True

    def __post_init__(self):
        object.__setattr__(self, "center_", np.atleast_1d(np.asarray(self.center_, dtype=complex)))
        object.__setattr__(self, "radii", np.atleast_1d(np.asarray(self.radii, dtype=float)))
        if np.any(self.radii <= 0) or len(self.radii) != len(self.center_):
            raise ValueError("need one positive radius per coordinate")

    @property
    def dim(self):
        return len(self.center_)

    @property
    def center(self):
        return self.center_

    @property
    def scale(self):
        return float(np.max(self.radii))

    def contains(self, points):
        return np.all(np.abs(_pts(points) - self.center_) < self.radii, axis=-1)

    def _distance(self, pts):
        return np.min(self.radii - np.abs(pts - self.center_), axis=-1)

    def sample(self, k, seed=0):
        n = self.dim
        u = _halton(k, 2 * n, seed)
        rad = self.radii * np.sqrt(u[:, :n])
        return self.center_ + rad * np.exp(2j * np.pi * u[:, n:])

    def sample_near_boundary(self, k, seed=0, depth=1e-9):
        # points of the distinguished boundary (torus), pulled slightly inside
        u = _halton(k, self.dim, seed + 7919)
        return self.center_ + self.radii * (1 - depth) * np.exp(2j * np.pi * u)

    def project_closure(self, pts):
        v = _pts(pts) - self.center_
        r = np.abs(v)
        fac = np.where(r > self.radii, self.radii / np.where(r > 0, r, 1), 1.0)
        return self.center_ + v * fac

    def to_dict(self):
        return {
            "shape": "polydisc",
            "dim": self.dim,
            "center": _c(self.center_),
            "radii": [float(r) for r in self.radii],
        }


@dataclass(frozen=True, eq=False)
class Box(Domain):
    """Product of open rectangles ``re in (a, b), im in (c, d)`` per coordinate."""

    closed_form_closure = True

    re_bounds: np.ndarray  # (n, 2)
    im_bounds: np.ndarray  # (n, 2)

    def __post_init__(self):
        object.__setattr__(self, "re_bounds", np.asarray(self.re_bounds, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "im_bounds", np.asarray(self.im_bounds, dtype=float).reshape(-1, 2))
        for b in (self.re_bounds, self.im_bounds):
            if np.any(b[:, 1] <= b[:, 0]):
                raise ValueError("box bounds must satisfy lo < hi")

    @property
    def dim(self):
        return len(self.re_bounds)

    @property
    def center(self):
        return self.re_bounds.mean(axis=1) + 1j * self.im_bounds.mean(axis=1)

    @property
    def scale(self):
        return 0.5 * float(np.max(np.r_[np.diff(self.re_bounds), np.diff(self.im_bounds)]))

    def contains(self, points):
        p = _pts(points)
        x, y = p.real, p.imag
        ok = (x > self.re_bounds[:, 0]) & (x < self.re_bounds[:, 1])
        ok &= (y > self.im_bounds[:, 0]) & (y < self.im_bounds[:, 1])
        return np.all(ok, axis=-1)

    def _distance(self, pts):
        x, y = pts.real, pts.imag
        gaps = np.stack(
            [
                x - self.re_bounds[:, 0],
                self.re_bounds[:, 1] - x,
                y - self.im_bounds[:, 0],
                self.im_bounds[:, 1] - y,
            ],
            axis=-1,
        )
        return np.min(gaps, axis=(-1, -2))

    def sample(self, k, seed=0):
        n = self.dim
        u = _halton(k, 2 * n, seed)
        lo_r, hi_r = self.re_bounds[:, 0], self.re_bounds[:, 1]
        lo_i, hi_i = self.im_bounds[:, 0], self.im_bounds[:, 1]
        return (lo_r + u[:, :n] * (hi_r - lo_r)) + 1j * (lo_i + u[:, n:] * (hi_i - lo_i))

    def sample_near_boundary(self, k, seed=0, depth=1e-9):
        pts = self.sample(k, seed + 7919)
        rng = np.random.default_rng(seed)
        n = self.dim
        face = rng.integers(0, 4 * n, size=k)
        coord, side = face // 4, face % 4
        rows = np.arange(k)
        x, y = pts.real.copy(), pts.imag.copy()
        for s, arr, bounds, sign in (
            (0, x, self.re_bounds[:, 0], 1),
            (1, x, self.re_bounds[:, 1], -1),
            (2, y, self.im_bounds[:, 0], 1),
            (3, y, self.im_bounds[:, 1], -1),
        ):
            sel = side == s
            arr[rows[sel], coord[sel]] = bounds[coord[sel]] + sign * depth
        return x + 1j * y

    def project_closure(self, pts):
        p = _pts(pts)
        x = np.clip(p.real, self.re_bounds[:, 0], self.re_bounds[:, 1])
        y = np.clip(p.imag, self.im_bounds[:, 0], self.im_bounds[:, 1])
        return x + 1j * y

    def to_dict(self):
        return {
            "shape": "box",
            "dim": self.dim,
            "re": self.re_bounds.tolist(),
            "im": self.im_bounds.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Annulus(Domain):
    center_: complex
    r_in: float
    r_out: float
    closed_form_closure = True

    def __post_init__(self):
        object.__setattr__(self, "center_", complex(self.center_))
        if not 0 <= self.r_in < self.r_out:
            raise ValueError("need 0 <= r_in < r_out")

    dim = 1

    @property
    def center(self):
        return np.array([self.center_], dtype=complex)

    @property
    def scale(self):
        return float(self.r_out)

    def _r(self, pts):
        return np.abs(_pts(pts)[..., 0] - self.center_)

    def contains(self, points):
        r = self._r(points)
        return (r > self.r_in) & (r < self.r_out)

    def _distance(self, pts):
        r = self._r(pts)
        return np.minimum(r - self.r_in, self.r_out - r)

    def sample(self, k, seed=0):
        u = _halton(k, 2, seed)
        r = np.sqrt(self.r_in**2 + u[:, 0] * (self.r_out**2 - self.r_in**2))
        r = np.clip(r, self.r_in * (1 + 1e-12) + 1e-300, self.r_out * (1 - 1e-12))
        return (self.center_ + r * np.exp(2j * np.pi * u[:, 1]))[:, None]

    def sample_near_boundary(self, k, seed=0, depth=1e-9):
        u = _halton(k, 2, seed + 7919)
        outer = u[:, 0] < 0.5 if self.r_in > 0 else np.ones(k, bool)
        r = np.where(outer, self.r_out - depth, self.r_in + depth)
        return (self.center_ + r * np.exp(2j * np.pi * u[:, 1]))[:, None]

    def project_closure(self, pts):
        v = _pts(pts)[..., 0] - self.center_
        r = np.abs(v)
        rc = np.clip(r, self.r_in, self.r_out)
        safe = np.where(r > 0, v / np.where(r > 0, r, 1), 1.0)
        return (self.center_ + rc * safe)[..., None]

    def to_dict(self):
        return {
            "shape": "annulus",
            "dim": 1,
            "center": _c(self.center_),
            "r_in": self.r_in,
            "r_out": self.r_out,
        }


@dataclass(frozen=True, eq=False)
class FullSpace(Domain):
    dim: int = 1
    bounded = False

    @property
    def center(self):
        return np.zeros(self.dim, dtype=complex)

    def contains(self, points):
        p = _pts(points)
        return np.all(np.isfinite(p), axis=-1)

    def _distance(self, pts):
        return np.full(pts.shape[:-1], np.inf)

    def sample(self, k, seed=0):
        # Gaussian radius profile around the origin, low-discrepancy driven
        u = _halton(k, 2 * self.dim, seed)
        g = norm.ppf(u)
        return (g[:, : self.dim] + 1j * g[:, self.dim :]) / math.sqrt(2)

    def to_dict(self):
        return {"shape": "fullspace", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Generic(Domain):
    """User-supplied open set.

    ``distance_bound(points)`` must return a lower bound for the distance
    to the boundary; connectedness is trusted from ``connected``.
    ``box`` is a ``(re_lo, re_hi, im_lo, im_hi)`` bounding box used for
    rejection sampling.
    """

    dim: int
    membership: Callable[[np.ndarray], np.ndarray]
    distance_bound: Callable[[np.ndarray], np.ndarray]
    box: tuple
    connected: bool = True
    anchor: np.ndarray | None = None
    bounded = True

    @property
    def center(self):
        if self.anchor is not None:
            return as_point(self.anchor)
        lo_r, hi_r, lo_i, hi_i = self.box
        return np.full(self.dim, 0.5 * (lo_r + hi_r) + 0.5j * (lo_i + hi_i))

    @property
    def scale(self):
        lo_r, hi_r, lo_i, hi_i = self.box
        return 0.5 * max(hi_r - lo_r, hi_i - lo_i)

    def contains(self, points):
        p = _pts(points)
        shape = p.shape[:-1]
        return np.asarray(self.membership(p.reshape(-1, self.dim)), bool).reshape(shape)

    def _distance(self, pts):
        shape = pts.shape[:-1]
        return np.asarray(self.distance_bound(pts.reshape(-1, self.dim)), float).reshape(shape)

    def sample(self, k, seed=0):
        rng = np.random.default_rng(seed)
        lo_r, hi_r, lo_i, hi_i = self.box
        out = []
        attempts = 0
        while len(out) < k:
            batch = min(4 * k + 64, MAX_REJECTION_ATTEMPTS - attempts)
            if batch <= 0:
                raise SamplingFailure(f"rejection sampling found {len(out)}/{k} points")
            cand = rng.uniform(lo_r, hi_r, (batch, self.dim)) + 1j * rng.uniform(
                lo_i, hi_i, (batch, self.dim)
            )
            attempts += batch
            out.extend(cand[self.contains(cand)])
        return np.array(out[:k])

    def spot_check_connected(self, pairs: int = 20, steps: int = 200, seed: int = 0) -> bool:
        """Straight-segment check between sample pairs; a heuristic, never a proof."""
        pts = self.sample(2 * pairs, seed)
        t = np.linspace(0, 1, steps)[:, None]
        hits = 0
        for a, b in zip(pts[::2], pts[1::2]):
            hits += bool(np.all(self.contains(a + t * (b - a))))
        return hits > 0


def contains(X: Domain, z) -> bool:
    p = _pts(z)
    if p.shape[-1] != X.dim:
        raise ValueError(f"point dimension {p.shape[-1]} != domain dimension {X.dim}")
    return bool(X.contains(p))


def boundary_distance(X: Domain, w) -> float:
    return X.boundary_distance(as_point(w))


def sample_domain(X: Domain, k: int, seed: int = 0) -> np.ndarray:
    """``k`` deterministic points of X, shape ``(k, n)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return X.sample(k, seed)


def _cvec(raw, n=None) -> np.ndarray:
    """Complex vector from JSON: numbers, ``[re, im]`` pairs or strings."""
    if isinstance(raw, (int, float, str)):
        raw = [raw]
    out = []
    for v in raw:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ConfigError(f"complex pair must be [re, im], got {v}")
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, str):
            out.append(complex(v.replace(" ", "").replace("i", "j")))
        elif isinstance(v, complex):
            out.append(v)
        else:
            out.append(complex(float(v)))
    arr = np.array(out, dtype=complex)
    if n is not None and len(arr) != n:
        raise ConfigError(f"expected {n} coordinates, got {len(arr)}")
    return arr


def domain_from_dict(desc: dict) -> Domain:
    """Build a domain from its JSON form ``{"shape": ..., "dim": n, ...}``."""
    try:
        shape = desc["shape"]
        n = int(desc.get("dim", 1))
        if shape == "ball":
            center = _cvec(desc.get("center", [0] * n), n)
            return Ball(center, float(desc["radius"]))
        if shape == "polydisc":
            center = _cvec(desc.get("center", [0] * n), n)
            radii = np.asarray(desc["radii"], float)
            if radii.ndim == 0:
                radii = np.full(n, float(radii))
            return Polydisc(center, radii)
        if shape == "box":
            re_b = np.asarray(desc["re"], float).reshape(n, 2)
            im_b = np.asarray(desc["im"], float).reshape(n, 2)
            return Box(re_b, im_b)
        if shape == "annulus":
            if n != 1:
                raise ConfigError("annulus domains are one-dimensional")
            center = _cvec(desc.get("center", [0]), 1)[0]
            return Annulus(center, float(desc["r_in"]), float(desc["r_out"]))
        if shape == "fullspace":
            return FullSpace(n)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid domain specification {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown domain shape {desc.get('shape')!r}")
