"""Disc-mean envelopes of upper semicontinuous functions.

``poletsky_step(U, z)`` minimizes the circle mean of ``U`` along
polynomial discs ``h(zeta) = z + sum_k c_k zeta^k`` (degree <= d_h,
coefficients bounded by a cap). The result never exceeds ``U(z)`` since
the constant disc is always admissible.

Fields are callables taking points of shape ``(..., n)`` and returning
values of shape ``(...)``. :class:`MemoField` wraps a batched evaluator
with a table keyed by points quantized to 1e-9, which is how lazily
evaluated iterates share work across queries.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .discs import as_point
from .errors import BudgetExceeded
from .family import point_seed
from .quadrature import ADAPTIVE_TOL, DEFAULT_NODES, MAX_NODES, QuadratureRule

QUANTUM = 1e-9


def quantize(points) -> np.ndarray:
    """Round points onto the 1e-9 lattice used for memo keys."""
    p = np.asarray(points, dtype=complex)
    return np.round(p.real / QUANTUM) * QUANTUM + 1j * (np.round(p.imag / QUANTUM) * QUANTUM)


class MemoField:
    """Memoized batched scalar field.

    ``evaluate(P)`` receives a ``(m, n)`` array of distinct quantized points
    and returns ``m`` values. Points are quantized before evaluation so the
    stored value never depends on which nearby point arrived first.
    Concurrent inserts of the same key store identical values.

    Parameters
    ----------
    evaluate : callable
    budget : int, optional
        Maximum number of distinct evaluations; exceeding it raises
        :class:`BudgetExceeded`.
    chunk : int
        Largest batch handed to ``evaluate`` at once.
    """

    def __init__(self, evaluate, budget: int | None = None, chunk: int = 2048):
        self._evaluate = evaluate
        self.budget = budget
        self.chunk = chunk
        self.table: dict[bytes, float] = {}
        self.evaluations = 0
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.table)

    def __call__(self, points) -> np.ndarray:
        pts = quantize(points)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        keys = [row.tobytes() for row in flat]
        out = np.empty(len(keys))
        missing: dict[bytes, int] = {}
        table = self.table
        for i, k in enumerate(keys):
            v = table.get(k)
            if v is None:
                missing.setdefault(k, i)
            else:
                out[i] = v
        if missing:
            with self._lock:
                if self.budget is not None and self.evaluations + len(missing) > self.budget:
                    raise BudgetExceeded(
                        f"field evaluation budget {self.budget} exhausted"
                    )
                self.evaluations += len(missing)
            idx = np.fromiter(missing.values(), dtype=int, count=len(missing))
            todo = flat[idx]
            vals = np.concatenate(
                [np.asarray(self._evaluate(todo[a : a + self.chunk]), dtype=float)
                 for a in range(0, len(todo), self.chunk)]
            )
            for k, v in zip(missing, vals):
                table[k] = float(v)
            for i, k in enumerate(keys):
                if k in missing:
                    out[i] = table[k]
        return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class PoletskyDisc:
    """``h(zeta) = center + sum_k coefficients[k-1] zeta^k``."""

    center: np.ndarray
    coefficients: np.ndarray  # (d_h, n)

    def __post_init__(self):
        c = as_point(self.center)
        co = np.asarray(self.coefficients, dtype=complex).reshape(-1, len(c))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "coefficients", co)

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.any(self.coefficients != 0, axis=1))[0]
        return int(nz[-1] + 1) if nz.size else 0

    def coefficient_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coefficients, axis=1)

    def __call__(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        k = np.arange(1, len(self.coefficients) + 1)
        powers = zeta[..., None] ** k
        return self.center + powers @ self.coefficients

    def describe(self) -> str:
        if self.degree == 0:
            return "constant disc"
        norms = ", ".join(f"{v:.4g}" for v in self.coefficient_norms()[: self.degree])
        return f"polynomial disc degree {self.degree} |c_k|=({norms})"


@dataclass(frozen=True)
class PoletskyConfig:
    """Search budget for one disc-mean minimization.

    Candidate discs ``z + t v zeta`` use radii ``t = cap * 2^k`` for
    ``k`` in ``radius_exponents`` and directions from the coordinate axes,
    caller hints and ``random_directions`` seeded unit vectors; the best
    ``starts`` are refined by a compass search over all real coefficient
    parts.
    """

    disc_degree: int = 4
    coeff_cap_factor: float = 8.0
    nodes: int = 64
    radius_exponents: tuple = (-9, -8, -7, -6, -5, -4, -3, -2, -1)
    random_directions: int = 2
    starts: int = 2
    refine_steps: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.disc_degree < 0 or self.starts < 1 or self.refine_steps < 0:
            raise ValueError("disc_degree and refine_steps must be non-negative, starts positive")
        if not self.coeff_cap_factor > 0:
            raise ValueError("coeff_cap_factor must be positive")
        QuadratureRule(self.nodes)

    def cap(self, z) -> float:
        return self.coeff_cap_factor * (1.0 + float(np.linalg.norm(z)))


@dataclass(frozen=True, eq=False)
class PoletskyResult:
    value: float
    disc: PoletskyDisc
    exhausted: bool = False
    candidates: int = 0


def _batched_means(U, z, C, nodes) -> np.ndarray:
    """Means of U over discs with coefficient stacks ``C`` (B, d_h, n)."""
    k = np.arange(1, C.shape[1] + 1)
    powers = nodes[:, None] ** k  # (N, d_h)
    pts = z + np.einsum("nk,bkj->bnj", powers, C)
    return U(pts).mean(axis=-1)


def adaptive_disc_mean(U, disc: PoletskyDisc, start: int = DEFAULT_NODES) -> float:
    """Circle mean of U along ``disc`` with node doubling to 1e-8."""
    n = start
    total = float(np.sum(U(disc(QuadratureRule(n).nodes))))
    prev = total / n
    while n < MAX_NODES:
        odd = np.exp(2j * np.pi * (2 * np.arange(n) + 1) / (2 * n))
        total += float(np.sum(U(disc(odd))))
        n *= 2
        cur = total / n
        if abs(cur - prev) < ADAPTIVE_TOL:
            return cur
        prev = cur
    return prev


def candidate_directions(z, cfg: PoletskyConfig, hints=()) -> list[np.ndarray]:
    z = as_point(z)
    n = len(z)
    dirs = [np.eye(n, dtype=complex)[j] for j in range(n)]
    for h in hints:
        h = np.asarray(h, dtype=complex)
        nh = np.linalg.norm(h)
        if nh > 0:
            dirs.append(h / nh)
    if n > 1 and cfg.random_directions > 0:
        rng = np.random.default_rng(point_seed(cfg.seed, z))
        for _ in range(cfg.random_directions):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            dirs.append(v / np.linalg.norm(v))
    return dirs


def poletsky_step(U, z, cfg: PoletskyConfig | None = None, rule: QuadratureRule | None = None,
                  hints=(), u_at_z: float | None = None) -> PoletskyResult:
    """Minimize the circle mean of U over polynomial discs centred at z.

    Parameters
    ----------
    U : callable
        Batched field, points ``(..., n)`` to values ``(...)``.
    z : array_like
        Centre.
    cfg : PoletskyConfig, optional
    rule : QuadratureRule, optional
        Rule used during the search; defaults to ``cfg.nodes`` nodes.
        Final candidates are re-evaluated with adaptive quadrature.
    hints : sequence of vectors
        Extra directions for the degree-1 candidates.
    u_at_z : float, optional
        Known value ``U(z)`` (skips one evaluation).

    Returns
    -------
    PoletskyResult
        ``value <= U(z)``; on budget exhaustion the best value found so
        far is returned with ``exhausted=True``.
    """
    cfg = cfg or PoletskyConfig()
    z = as_point(z)
    n = len(z)
    dh = cfg.disc_degree
    rule = rule or QuadratureRule(cfg.nodes)
    base = float(U(z[None, :])[0]) if u_at_z is None else float(u_at_z)
    best = PoletskyResult(base, PoletskyDisc(z, np.zeros((max(dh, 1), n))), False, 0)
    if dh == 0:
        return best

    cap = cfg.cap(z)
    dirs = candidate_directions(z, cfg, hints)
    radii = [cap * 2.0**k for k in cfg.radius_exponents if cap * 2.0**k <= cap]
    C = np.zeros((len(dirs) * len(radii), dh, n), dtype=complex)
    for i, (v, t) in enumerate((v, t) for v in dirs for t in radii):
        C[i, 0] = t * v
    try:
        F = _batched_means(U, z, C, rule.nodes)
        S = min(cfg.starts, len(C))
        order = np.argsort(F, kind="stable")[:S]
        X0, F0 = C[order].copy(), F[order].copy()
        h = 0.25 * np.linalg.norm(X0[:, 0], axis=1)
        h = np.where(h > 0, h, 0.25 * cap * 2.0 ** min(cfg.radius_exponents))
        # compass moves: +-1 and +-i on each (k, j) coefficient
        m = dh * n
        moves = np.zeros((4 * m, dh, n), dtype=complex)
        for a in range(m):
            kk, jj = divmod(a, n)
            for b, unit in enumerate((1, -1, 1j, -1j)):
                moves[4 * a + b, kk, jj] = unit
        evaluated = len(C)
        for _ in range(cfg.refine_steps):
            trial = X0[:, None] + h[:, None, None, None] * moves[None]
            norms = np.linalg.norm(trial, axis=-1).max(axis=-1)
            Ft = np.full(trial.shape[:2], np.inf)
            ok = norms <= cap
            if np.any(ok):
                Ft[ok] = _batched_means(U, z, trial[ok], rule.nodes)
                evaluated += int(ok.sum())
            k = np.argmin(Ft, axis=1)
            fb = Ft[np.arange(S), k]
            imp = fb < F0
            X0[imp] = trial[imp, k[imp]]
            F0[imp] = fb[imp]
            h[~imp] *= 0.5
        finals = [PoletskyDisc(z, X0[s]) for s in np.argsort(F0, kind="stable")]
        best = PoletskyResult(base, best.disc, False, evaluated)
        for disc in finals:
            val = adaptive_disc_mean(U, disc)
            if val < best.value:
                best = PoletskyResult(val, disc, False, evaluated)
    except BudgetExceeded:
        return PoletskyResult(best.value, best.disc, True, best.candidates)
    return best


@dataclass(frozen=True)
class StencilConfig:
    """Cheap degree-1 disc search used for inner lazy iterates."""

    radii: tuple = (1 / 8,)  # fractions of the coefficient cap
    nodes: int = 16


class StencilIterate:
    """Lazy ``U_{m+1} = min(U_m, stencil mean of U_m)``, memoized.

    The stencil uses discs ``y + t e_j zeta`` with ``t`` a multiple of the
    coefficient cap scale at y, so it is a (much) smaller search than
    :func:`poletsky_step`; it still only lowers U_m by actual disc means.
    """

    def __init__(self, prev, cap_factor: float, stencil: StencilConfig | None = None,
                 budget: int | None = None):
        self.prev = prev
        self.cap_factor = cap_factor
        self.stencil = stencil or StencilConfig()
        self.memo = MemoField(self._evaluate, budget)

    def _evaluate(self, Y) -> np.ndarray:
        m, n = Y.shape
        rule = QuadratureRule(self.stencil.nodes)
        base = self.prev(Y)
        best = base.copy()
        cap = self.cap_factor * (1 + np.linalg.norm(Y, axis=1))
        for t in self.stencil.radii:
            for j in range(n):
                pts = Y[:, None, :] + np.zeros((1, rule.node_count, n), complex)
                pts[:, :, j] += (t * cap)[:, None] * rule.nodes[None, :]
                best = np.minimum(best, self.prev(pts).mean(axis=-1))
        return best

    def __call__(self, points) -> np.ndarray:
        return self.memo(points)
