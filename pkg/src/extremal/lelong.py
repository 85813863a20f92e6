"""Lelong-class subsolutions ``u = (1/d) log|P| + c`` and the lower bound.

Every such u is plurisubharmonic with ``u(z) <= log+ ||z|| + c_u``, so a
candidate calibrated to stay below q on X bounds the extremal function
from below. Calibration maximizes ``(1/d) log|P| - q`` over a sample of X
(interior plus near-boundary points) and then sharpens the leading
maxima by a local search over the closure of X.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .discs import as_point
from .family import point_seed
from .quadrature import QuadratureRule

TOL_HOMOGENEITY = 1e-6


@dataclass(frozen=True, eq=False)
class LelongCandidate:
    """``u(z) = (1/d) log|P(z)| + offset``; ``d = 0`` means ``u = offset``.

    ``exponents`` is a ``(T, n)`` integer table and ``coeffs`` the matching
    complex coefficients of P.
    """

    degree: int
    exponents: np.ndarray
    coeffs: np.ndarray
    offset: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if self.degree > 0:
            total = self.exponents.sum(axis=1)
            if np.any(total > self.degree):
                raise ValueError("polynomial degree exceeds the candidate degree")

    @property
    def dim(self) -> int:
        return self.exponents.shape[1]

    @property
    def growth_constant(self) -> float:
        """A constant c_u with ``u <= log+ ||z|| + c_u`` on C^n."""
        if self.degree == 0:
            return self.offset
        return self.offset + np.log(np.sum(np.abs(self.coeffs))) / self.degree

    def poly(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        mon = np.prod(pts[..., None, :] ** self.exponents, axis=-1)
        return mon @ self.coeffs

    def log_modulus(self, points) -> np.ndarray:
        """``(1/d) log|P|`` (zero for d = 0)."""
        pts = np.asarray(points, dtype=complex)
        if self.degree == 0:
            return np.zeros(pts.shape[:-1])
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.poly(pts))) / self.degree

    def __call__(self, points) -> np.ndarray:
        return self.log_modulus(points) + self.offset

    def lift(self, tilde) -> np.ndarray:
        """Homogenized ``v(z0, z') = u(z'/z0) + log|z0|`` through ``P^h``."""
        tilde = np.asarray(tilde, dtype=complex)
        z0 = tilde[..., 0]
        with np.errstate(divide="ignore"):
            if self.degree == 0:
                return self.offset + np.log(np.abs(z0))
            zp = tilde[..., 1:]
            powers0 = self.degree - self.exponents.sum(axis=1)
            mon = z0[..., None] ** powers0 * np.prod(zp[..., None, :] ** self.exponents, axis=-1)
            return np.log(np.abs(mon @ self.coeffs)) / self.degree + self.offset

    def with_offset(self, c: float) -> "LelongCandidate":
        return replace(self, offset=float(c))

    def describe(self) -> str:
        if self.degree == 0:
            return f"constant {self.offset:.6g}"
        return f"(1/{self.degree}) log|{self.label or 'P'}| {self.offset:+.6g}"


def constant_candidate(c: float, dim: int) -> LelongCandidate:
    return LelongCandidate(0, np.zeros((1, dim), int), np.ones(1, complex), float(c), "1")


def from_terms(terms: dict, dim: int, degree: int | None = None, label: str = "") -> LelongCandidate:
    """Candidate from ``{exponent tuple: coefficient}``."""
    terms = {k: v for k, v in terms.items() if v != 0}
    exps = np.array(list(terms), dtype=int).reshape(-1, dim)
    coeffs = np.array(list(terms.values()), dtype=complex)
    d = int(exps.sum(axis=1).max()) if degree is None else degree
    return LelongCandidate(d, exps, coeffs, 0.0, label)


def _linear_terms(v, w) -> dict:
    """Terms of ``sum_j v_j (z_j - w_j)``."""
    n = len(v)
    terms = {(0,) * n: complex(-np.dot(v, w))}
    for j in range(n):
        e = [0] * n
        e[j] = 1
        terms[tuple(e)] = complex(v[j])
    return terms


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return out


def _fmt_point(w) -> str:
    return ", ".join(f"{c.real:.4g}{c.imag:+.4g}i" for c in np.atleast_1d(w))


def linear_product(factors, label: str = "") -> LelongCandidate:
    """``prod_k <z - w_k, v_k>`` (bilinear, no conjugation) as a candidate."""
    factors = list(factors)
    n = len(factors[0][0])
    terms = {(0,) * n: 1.0 + 0j}
    for v, w in factors:
        terms = _mul(terms, _linear_terms(np.asarray(v, complex), np.asarray(w, complex)))
    return from_terms(terms, n, len(factors), label)


def monomial(alpha, center) -> LelongCandidate:
    """``prod_j (z_j - c_j)^alpha_j``."""
    alpha = tuple(int(a) for a in alpha)
    n = len(alpha)
    center = as_point(center)
    terms = {(0,) * n: 1.0 + 0j}
    for j, a in enumerate(alpha):
        e = np.zeros(n, complex)
        e[j] = 1
        for _ in range(a):
            terms = _mul(terms, _linear_terms(e, center))
    lab = "*".join(f"(z{j + 1}-c)^{a}" for j, a in enumerate(alpha) if a)
    return from_terms(terms, n, sum(alpha), lab)


def homogenization_check(u: LelongCandidate, trials: int = 1000, seed: int = 0, nodes: int = 1024) -> float:
    """Largest violation of log-homogeneity or the sub-mean-value property
    of the homogenized function ``v`` on C^{n+1} minus the origin.

    Circles are drawn on random affine complex lines; radii are chosen
    away from the zeros of ``P^h`` restricted to the line so the
    trapezoidal rule stays accurate.
    """
    rng = np.random.default_rng(seed)
    n1 = u.dim + 1
    rule = QuadratureRule(nodes)
    worst = 0.0
    probe = QuadratureRule(max(8, 1 << int(np.ceil(np.log2(u.degree + 2)))))

    def crandn(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    for _ in range(trials):
        zt = crandn(n1)
        lam = crandn()
        hom = abs(u.lift(lam * zt) - u.lift(zt) - np.log(abs(lam)))
        if np.isfinite(hom):
            worst = max(worst, float(hom))

        a, b = crandn(n1), crandn(n1)
        # restriction of the homogenized polynomial (z0 itself for d = 0) to the line
        deg = max(u.degree, 1)
        if u.degree == 0:
            line = (a[0] + probe.nodes * b[0])
        else:
            vals = (a + probe.nodes[:, None] * b)
            z0 = vals[:, 0]
            powers0 = u.degree - u.exponents.sum(axis=1)
            line = (z0[:, None] ** powers0 * np.prod(vals[:, None, 1:] ** u.exponents, axis=-1)) @ u.coeffs
        coeffs = np.fft.fft(line) / probe.node_count
        coeffs = coeffs[: deg + 1]
        zeros = np.roots(coeffs[::-1]) if np.any(coeffs[1:] != 0) else np.array([])
        mods = np.abs(zeros)
        for _attempt in range(50):
            rho = rng.uniform(0.2, 2.0)
            if mods.size == 0 or np.all(np.abs(mods / rho - 1) > 0.05):
                break
        center = u.lift(a)
        if not np.isfinite(center):
            continue
        mean = float(np.mean(u.lift(a + rho * rule.nodes[:, None] * b)))
        worst = max(worst, float(center - mean))
    return worst


@dataclass(frozen=True)
class LowerBoundConfig:
    degree_max: int = 3
    calib_samples: int = 4096
    seed: int = 0
    sample_centers: int = 8
    refine_top: int = 4
    product_pool: int = 6


class LowerBoundContext:
    """Caches the calibration sample and per-candidate calibrations for one (X, q)."""

    def __init__(self, X, q, cfg: LowerBoundConfig | None = None):
        self.X = X
        self.q = q
        self.cfg = cfg or LowerBoundConfig()
        M = self.cfg.calib_samples
        pts = [X.sample(M, self.cfg.seed)]
        if X.bounded:
            pts.append(X.sample_near_boundary(M, self.cfg.seed))
        self.sample = np.vstack(pts)
        self.q_sample, self.clipped = q.evaluate(self.sample)
        self._calib: dict = {}
        self.centers = np.vstack([X.center[None, :], X.sample(self.cfg.sample_centers, self.cfg.seed + 1)])

    def _g(self, cand: LelongCandidate, pts) -> np.ndarray:
        q, _ = self.q.evaluate(pts)
        return cand.log_modulus(pts) - q

    def sampled_max(self, cand: LelongCandidate) -> tuple[float, np.ndarray]:
        g = cand.log_modulus(self.sample) - self.q_sample
        k = int(np.argmax(g))
        return float(g[k]), self.sample[k]

    def refined_max(self, cand: LelongCandidate) -> float:
        """Sample maximum of ``(1/d) log|P| - q`` sharpened by local searches on the closure."""
        g = cand.log_modulus(self.sample) - self.q_sample
        best = float(np.max(g))
        X = self.X
        n = X.dim
        starts = self.sample[np.argsort(-g, kind="stable")[: self.cfg.refine_top]]
        for x0 in starts:

            def neg(y):
                x = X.project_closure(y[:n] + 1j * y[n:])
                if not X.closed_form_closure and not X.contains(x):
                    return np.inf
                val = float(self._g(cand, x[None, :])[0])
                return -val if np.isfinite(val) else np.inf

            res = minimize(
                neg,
                np.r_[x0.real, x0.imag],
                method="Nelder-Mead",
                options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 400 * n, "adaptive": True},
            )
            if np.isfinite(res.fun):
                best = max(best, -float(res.fun))
        return best

    def calibrate(self, cand: LelongCandidate, refine: bool) -> tuple[float, bool]:
        """Offset making ``u <= q`` on the sample (and refined maxima)."""
        key = (cand.label, cand.degree, cand.exponents.tobytes(), cand.coeffs.tobytes())
        hit = self._calib.get(key)
        if hit is not None and (hit[1] or not refine):
            return hit
        if cand.degree == 0:
            c = float(np.min(self.q_sample))
            if refine and not self.q.is_constant:
                c = min(c, -self.refined_max(cand))
            out = (c, refine or self.q.is_constant)
        elif refine:
            out = (-self.refined_max(cand), True)
        else:
            out = (-self.sampled_max(cand)[0], False)
        self._calib[key] = out
        return out

    def pool(self, z) -> list[LelongCandidate]:
        X, cfg = self.X, self.cfg
        n = X.dim
        out = [constant_candidate(0.0, n)]
        if not X.bounded:
            return out
        for d in range(1, cfg.degree_max + 1):
            for alpha in itertools.product(range(d + 1), repeat=n):
                if sum(alpha) == d:
                    out.append(monomial(alpha, X.center))
        rng = np.random.default_rng(point_seed(cfg.seed, z))
        dirs = [np.eye(n, dtype=complex)[j] for j in range(n)]
        for _ in range(2 if n > 1 else 0):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            dirs.append(v / np.linalg.norm(v))
        for w in self.centers:
            dz = z - w
            nz = np.linalg.norm(dz)
            wdirs = list(dirs) if n > 1 else [dirs[0]]
            if nz > 0 and n > 1:
                wdirs.append(np.conj(dz) / nz)
            for v in wdirs:
                out.append(linear_product([(v, w)], label=f"<z-w,v> w=({_fmt_point(w)})"))
        return out

    def best(self, z) -> tuple[float, LelongCandidate]:
        z = as_point(z)
        pool = self.pool(z)
        vals = []
        for cand in pool:
            c, _ = self.calibrate(cand, refine=False)
            vals.append(float(cand.log_modulus(z[None, :])[0] + c))
        # products of the strongest linear factors
        if self.X.bounded and self.cfg.degree_max >= 2:
            lin = [
                (v, p) for v, p in zip(vals, pool)
                if p.degree == 1 and p.label.startswith("<") and np.isfinite(v)
            ]
            lin.sort(key=lambda t: -t[0])
            top = [p for _, p in lin[: self.cfg.product_pool]]
            for k in range(2, self.cfg.degree_max + 1):
                for combo in itertools.combinations(range(len(top)), k):
                    terms = {(0,) * self.X.dim: 1.0 + 0j}
                    for i in combo:
                        terms = _mul(terms, dict(zip(map(tuple, top[i].exponents), top[i].coeffs)))
                    cand = from_terms(terms, self.X.dim, k, "*".join(top[i].label for i in combo))
                    c, _ = self.calibrate(cand, refine=False)
                    pool.append(cand)
                    vals.append(float(cand.log_modulus(z[None, :])[0] + c))
        vals = np.array(vals)
        refined = np.zeros(len(pool), bool)
        # refining can only lower a value; stop once the leader is refined
        while True:
            k = int(np.argmax(np.where(np.isfinite(vals), vals, -np.inf)))
            if refined[k]:
                break
            c, _ = self.calibrate(pool[k], refine=True)
            vals[k] = float(pool[k].log_modulus(z[None, :])[0] + c)
            refined[k] = True
        k = int(np.argmax(vals))
        c, _ = self.calibrate(pool[k], refine=True)
        return float(vals[k]), pool[k].with_offset(c)


def lelong_lower_bound(z, X, q, cfg: LowerBoundConfig | None = None, context: LowerBoundContext | None = None):
    """Best calibrated candidate value at z and the candidate itself."""
    ctx = context or LowerBoundContext(X, q, cfg)
    return ctx.best(z)
