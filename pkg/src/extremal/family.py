"""The explicit good class of discs and the envelope of J_q over it.

Besides constant discs in X the class consists of the Moebius-type discs

    f_{z,w,r}(zeta) = w + (s + r zeta) / (r + s zeta) * (r / s) * (z - w),
    s = ||z - w||,  0 < r < min(s, d(w, boundary X)),

which send 0 to z, the unit circle onto the circle of radius r about w
(inside the complex line through z and w), and cross the hyperplane at
infinity exactly once, at zeta = -r/s. Their functional value is
``log(s / r) + mean of q over the image circle``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .discs import RationalDisc, as_point, clip_low, make_rational_disc
from .errors import ConstraintViolation
from .quadrature import ADAPTIVE_TOL, DEFAULT_NODES, MAX_NODES, QuadratureRule


class _ConstantDisc:
    def __repr__(self):
        return "CONSTANT_DISC"


CONSTANT_DISC = _ConstantDisc()


@dataclass(frozen=True, eq=False)
class FamilyDiscParams:
    z: np.ndarray
    w: np.ndarray
    r: float

    def __post_init__(self):
        object.__setattr__(self, "z", as_point(self.z))
        object.__setattr__(self, "w", as_point(self.w))
        object.__setattr__(self, "r", float(self.r))

    @property
    def s(self) -> float:
        return float(np.linalg.norm(self.z - self.w))

    def validate(self, X=None) -> None:
        """Raise :class:`ConstraintViolation` unless the parameters are feasible."""
        if self.z.shape != self.w.shape:
            raise ConstraintViolation("z and w have different dimensions")
        s = self.s
        if s == 0:
            raise ConstraintViolation("w must differ from z")
        if not 0 < self.r < s:
            raise ConstraintViolation(f"need 0 < r < ||z - w|| = {s:g}, got r = {self.r:g}")
        if X is not None:
            if not X.contains(self.w):
                raise ConstraintViolation("w is not in X")
            d = float(X.boundary_distance(self.w))
            if not self.r < d:
                raise ConstraintViolation(f"need r < d(w, boundary X) = {d:g}, got r = {self.r:g}")

    def describe(self) -> str:
        def fmt(v):
            return "(" + ", ".join(f"{c.real:.6g}{c.imag:+.6g}i" for c in v) + ")"

        return f"family w={fmt(self.w)} r={self.r:.6g}"


@dataclass(frozen=True)
class SearchConfig:
    """Budget and parametrization of the (w, r) search.

    ``r = rho * min(||z - w||, d(w))`` with ``rho`` searched through
    ``log(1 - rho)``; ``nodes`` is the fixed quadrature size used while
    searching (the winning disc is re-evaluated adaptively).
    """

    starts: int = 64
    refine_steps: int = 200
    rho_cap: float = 1 - 1e-6
    rho_min: float = 1e-3
    r_search_factor: float = 10.0
    seed: int = 0
    pool: int = 256
    nodes: int = 64
    golden_steps: int = 30

    def __post_init__(self):
        if self.starts < 1 or self.refine_steps < 0 or self.pool < 1:
            raise ValueError("starts and pool must be positive, refine_steps non-negative")
        if not 0 < self.rho_min < self.rho_cap < 1:
            raise ValueError("need 0 < rho_min < rho_cap < 1")
        QuadratureRule(self.nodes)


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    value: float
    witness: object
    evaluations: int
    clipped: bool = False

    def describe(self) -> str:
        if self.witness is CONSTANT_DISC:
            return "constant disc"
        return self.witness.describe()


def family_disc(params: FamilyDiscParams, X=None) -> RationalDisc:
    """The degree-1 rational disc ``[r + s zeta : ...]`` for the parameters."""
    params.validate(X)
    z, w, r, s = params.z, params.w, params.r, params.s
    comps = [np.array([r, s], dtype=complex)]
    for zj, wj in zip(z, w):
        comps.append(np.array([r * zj, wj * s + (r * r / s) * (zj - wj)], dtype=complex))
    return make_rational_disc(comps)


def family_points(Z, W, R, zeta) -> np.ndarray:
    """Images of ``zeta`` under f_{z,w,r}, broadcast over leading axes.

    ``Z``, ``W`` have shape ``(..., n)``, ``R`` shape ``(...)``; result has
    shape ``(..., len(zeta), n)``.
    """
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    R = np.asarray(R, dtype=float)
    s = np.linalg.norm(Z - W, axis=-1)
    zeta = np.asarray(zeta, dtype=complex)
    mob = (s[..., None] + R[..., None] * zeta) / (R[..., None] + s[..., None] * zeta)
    direction = (Z - W) * (R / s)[..., None]
    return W[..., None, :] + mob[..., None] * direction[..., None, :]


def _batched_adaptive_family_mean(Z, W, R, q, start=DEFAULT_NODES):
    """Adaptive node doubling, vectorized over a batch of family discs."""
    B = len(R)
    n = start
    vals, clipped = clip_low(q(family_points(Z, W, R, QuadratureRule(n).nodes)))
    totals = vals.sum(axis=-1)
    prev = totals / n
    done = np.zeros(B, bool)
    out = prev.copy()
    while n < MAX_NODES and not np.all(done):
        act = ~done
        odd = np.exp(2j * np.pi * (2 * np.arange(n) + 1) / (2 * n))
        v, c = clip_low(q(family_points(Z[act], W[act], R[act], odd)))
        clipped |= c
        totals[act] += v.sum(axis=-1)
        n *= 2
        cur = totals[act] / n
        conv = np.abs(cur - prev[act]) < ADAPTIVE_TOL
        out[act] = cur
        prev[act] = cur
        idx = np.nonzero(act)[0]
        done[idx[conv]] = True
    return out, clipped


def j_q_family(params: FamilyDiscParams, q, rule: QuadratureRule | None = None) -> float:
    """``log(s / r)`` plus the circle mean of q along the disc boundary.

    ``rule=None`` uses adaptive node doubling.
    """
    s = params.s
    J = np.log(s / params.r)
    if getattr(q, "is_constant", False):
        return float(J + q.constant_value())
    Z, W, R = params.z[None], params.w[None], np.array([params.r])
    if rule is None:
        mean, _ = _batched_adaptive_family_mean(Z, W, R, q)
        return float(J + mean[0])
    vals, _ = clip_low(q(family_points(Z, W, R, rule.nodes)))
    return float(J + rule.mean(vals)[0])


def point_seed(seed: int, z) -> int:
    """Stable per-point seed from the base seed and a quantized point hash."""
    key = np.round(np.asarray(z, dtype=complex).view(float) * 1e9).astype(np.int64)
    h = hashlib.blake2b(key.tobytes() + int(seed).to_bytes(8, "little", signed=True), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class _Objective:
    """Vectorized J_q over (z, w, t) triples with ``rho = 1 - exp(t)``."""

    def __init__(self, X, q_var, cfg: SearchConfig):
        self.X = X
        self.q = None if q_var.is_constant else q_var
        self.rule = QuadratureRule(cfg.nodes)
        self.cfg = cfg
        self.count = 0
        self.clipped = False

    def radius(self, Z, W, T):
        s = np.linalg.norm(Z - W, axis=-1)
        d = self.X.distance_or_zero(W)
        return s, (1.0 - np.exp(T)) * np.minimum(s, d)

    def __call__(self, Z, W, T):
        shape = T.shape
        Z = Z.reshape(-1, Z.shape[-1])
        W = W.reshape(-1, W.shape[-1])
        T = T.reshape(-1)
        self.count += len(T)
        s, r = self.radius(Z, W, T)
        ok = (r > 0) & (s > 0) & self.X.contains(W)
        if not self.X.bounded:
            ok &= s <= self.cfg.r_search_factor * (1 + np.linalg.norm(Z, axis=-1))
        out = np.full(len(T), np.inf)
        if np.any(ok):
            val = np.log(s[ok] / r[ok])
            if self.q is not None:
                pts = family_points(Z[ok], W[ok], r[ok], self.rule.nodes)
                qv, c = clip_low(self.q(pts))
                self.clipped |= c
                val = val + qv.mean(axis=-1)
            out[ok] = val
        return out.reshape(shape)


def _refine(obj: _Objective, Z, W, T, cfg: SearchConfig, scale: float):
    """Batched compass search over (Re w, Im w, t); first-found best move wins."""
    B, n = W.shape
    t_lo = np.log1p(-cfg.rho_cap)
    t_hi = np.log1p(-cfg.rho_min)
    F = obj(Z, W, T)
    hw = np.full(B, 0.25 * scale)
    ht = np.full(B, 1.0)
    dirs = np.zeros((4 * n + 2, n), dtype=complex)
    tdir = np.zeros(4 * n + 2)
    for j in range(n):
        dirs[4 * j, j], dirs[4 * j + 1, j] = 1, -1
        dirs[4 * j + 2, j], dirs[4 * j + 3, j] = 1j, -1j
    tdir[-2], tdir[-1] = 1, -1
    active = np.isfinite(F)
    for _ in range(cfg.refine_steps):
        if not np.any(active):
            break
        a = np.nonzero(active)[0]
        Wt = W[a, None, :] + hw[a, None, None] * dirs[None]
        Tt = np.clip(T[a, None] + ht[a, None] * tdir[None], t_lo, t_hi)
        Ft = obj(np.broadcast_to(Z[a, None, :], Wt.shape), Wt, Tt)
        k = np.argmin(Ft, axis=1)
        best = Ft[np.arange(len(a)), k]
        imp = best < F[a]
        ia = a[imp]
        W[ia] = Wt[imp, k[imp]]
        T[ia] = Tt[imp, k[imp]]
        F[ia] = best[imp]
        ish = a[~imp]
        hw[ish] *= 0.5
        ht[ish] *= 0.5
        active &= ~((hw < 1e-10 * scale) & (ht < 1e-9))
    return W, T, F


def _golden_t(obj: _Objective, Z, W, T, F, cfg: SearchConfig):
    """Golden-section search in t for fixed w; keeps the incumbent if better."""
    lo = np.full(len(T), np.log1p(-cfg.rho_cap))
    hi = np.full(len(T), np.log1p(-cfg.rho_min))
    g = (np.sqrt(5) - 1) / 2
    c = hi - g * (hi - lo)
    d = lo + g * (hi - lo)
    fc, fd = obj(Z, W, c), obj(Z, W, d)
    for _ in range(cfg.golden_steps):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = np.where(left, hi - g * (hi - lo), d)
        new_d = np.where(left, c, lo + g * (hi - lo))
        fresh = obj(Z, W, np.where(left, new_c, new_d))
        fc, fd = np.where(left, fresh, fd), np.where(left, fc, fresh)
        c, d = new_c, new_d
    tm = 0.5 * (lo + hi)
    fm = obj(Z, W, tm)
    better = fm < F
    return np.where(better, tm, T), np.where(better, fm, F)


def envelope_batch(Z, X, q, cfg: SearchConfig | None = None) -> list[EnvelopeResult]:
    """E_B J_q at each row of ``Z`` (shape ``(P, n)``).

    Multistart search: a shared low-discrepancy pool of centres ``w`` plus
    per-point jittered candidates seeds ``starts`` compass searches over
    ``(w, log(1 - rho))``; the best family value is re-evaluated with
    adaptive quadrature and compared with the constant disc when z is in X.
    """
    cfg = cfg or SearchConfig()
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    P, n = Z.shape
    q_var, shift = q.split_constant()
    obj = _Objective(X, q_var, cfg)
    constant = q_var.is_constant
    scale = X.scale if X.bounded else 1.0

    base = X.sample(cfg.pool, cfg.seed)
    base = np.vstack([X.center[None, :], base])
    extra = max(4, cfg.pool // 8)
    pools = np.empty((P, len(base) + extra, n), dtype=complex)
    for i, z in enumerate(Z):
        rng = np.random.default_rng(point_seed(cfg.seed, z))
        if X.bounded:
            pick = base[rng.integers(0, len(base), extra)]
            jit = rng.normal(size=(extra, n)) + 1j * rng.normal(size=(extra, n))
            own = pick + 0.1 * scale * jit
            pools[i] = np.vstack([base, own])
        else:
            rad = cfg.r_search_factor * (1 + np.linalg.norm(z))
            g = rng.normal(size=(len(base) + extra, n)) + 1j * rng.normal(size=(len(base) + extra, n))
            g *= (rad / 3) / np.sqrt(2 * n)
            pools[i] = z + g
    t_lo = np.log1p(-cfg.rho_cap)
    t_grid = [t_lo] if constant else [t_lo, np.log(0.1), np.log(0.5)]
    K = pools.shape[1]
    cand_F = np.full((P, K), np.inf)
    cand_T = np.full((P, K), t_lo)
    Zb = np.broadcast_to(Z[:, None, :], pools.shape)
    for t in t_grid:
        Ft = obj(Zb, pools, np.full((P, K), t))
        better = Ft < cand_F
        cand_F = np.where(better, Ft, cand_F)
        cand_T = np.where(better, t, cand_T)

    S = min(cfg.starts, K)
    order = np.argsort(cand_F, axis=1, kind="stable")[:, :S]
    rows = np.arange(P)[:, None]
    W = pools[rows, order].reshape(P * S, n).copy()
    T = cand_T[rows, order].reshape(P * S).copy()
    Zs = np.repeat(Z, S, axis=0)
    W, T, F = _refine(obj, Zs, W, T, cfg, scale)
    if not constant and cfg.golden_steps > 0:
        T, F = _golden_t(obj, Zs, W, T, F, cfg)

    F = F.reshape(P, S)
    k = np.argmin(F, axis=1)
    flat = np.arange(P) * S + k
    best_W, best_T, best_F = W[flat], T[flat], F[np.arange(P), k]
    s, r = obj.radius(Z, best_W, best_T)
    feasible = np.isfinite(best_F)
    family_val = np.full(P, np.inf)
    clipped = obj.clipped
    if np.any(feasible):
        J = np.log(s[feasible] / r[feasible])
        if constant:
            family_val[feasible] = J
        else:
            mean, c = _batched_adaptive_family_mean(
                Z[feasible], best_W[feasible], r[feasible], q_var
            )
            clipped |= c
            family_val[feasible] = J + mean

    inside = X.contains(Z)
    const_val = np.full(P, np.inf)
    if np.any(inside):
        qv, c = clip_low(q_var(Z[inside]))
        const_val[inside] = qv
        clipped |= c

    per_eval = max(1, obj.count // P)
    out = []
    for i in range(P):
        if const_val[i] <= family_val[i]:
            out.append(EnvelopeResult(float(const_val[i] + shift), CONSTANT_DISC, per_eval, clipped))
        else:
            wit = FamilyDiscParams(Z[i], best_W[i], r[i])
            out.append(EnvelopeResult(float(family_val[i] + shift), wit, per_eval, clipped))
    return out


def envelope_EB(z, X, q, search: SearchConfig | None = None) -> EnvelopeResult:
    """Upper estimate of ``inf J_q(f)`` over good-class discs centred at z."""
    return envelope_batch(as_point(z)[None, :], X, q, search)[0]
