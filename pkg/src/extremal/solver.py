"""Sandwich computation of the weighted extremal function.

For a query point z the solver reports

* ``family_upper``: the good-class envelope E_B J_q(z);
* ``poletsky_upper``: ``U_ITER(z)`` where ``U_0 = E_B J_q`` and each
  iterate is ``min(U_m, disc mean of U_m)``, evaluated lazily with memo
  tables shared between queries;
* ``lower``: the best calibrated Lelong-class polynomial subsolution.

Additive constants of q are split off first and added back at the end,
so ``q + c`` yields exactly the ``q`` results shifted by ``c``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize

from .discs import as_point, j_q, make_rational_disc
from .errors import ConfigError, DiscError, RootFindingFailure
from .family import FamilyDiscParams, SearchConfig, envelope_batch, envelope_EB
from .lelong import LelongCandidate, LowerBoundConfig, LowerBoundContext
from .poletsky import MemoField, PoletskyConfig, StencilIterate, poletsky_step

TOL_SANDWICH = 1e-6
INNER_SEARCH = SearchConfig(starts=2, refine_steps=12, pool=32, nodes=32, golden_steps=0)


def LIGHT_STEP(cfg: PoletskyConfig) -> PoletskyConfig:
    """Degree-1, short-refinement variant used on stencil levels."""
    return replace(cfg, disc_degree=min(cfg.disc_degree, 1), nodes=32, starts=1, refine_steps=2)


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs.

    ``iter`` counts disc-mean iterations on top of E_B J_q; inner levels
    (``iter >= 2``) use a cheap degree-1 stencil. ``interpolation_mode``
    ``"grid"`` replaces U_0 by multilinear interpolation on a regular grid
    (n <= 2), which is faster but not a certified upper bound.
    """

    iter: int = 1
    disc_degree: int = 4
    coeff_cap_factor: float = 8.0
    lower_degree_max: int = 3
    calib_samples: int = 4096
    seed: int = 0
    interpolation_mode: str = "off"
    poletsky_nodes: int = 64
    poletsky_starts: int = 2
    poletsky_steps: int = 8
    grid_points: int = 17
    direct_refine: bool = False
    direct_degree: int = 2
    max_evaluations: int | None = None
    inner_search: SearchConfig = INNER_SEARCH

    def __post_init__(self):
        if self.iter < 0:
            raise ConfigError("iter must be non-negative")
        if self.interpolation_mode not in ("off", "grid"):
            raise ConfigError(f"interpolation_mode must be 'off' or 'grid', got {self.interpolation_mode!r}")
        if self.lower_degree_max < 0 or self.calib_samples < 1 or self.grid_points < 2:
            raise ConfigError("lower_degree_max >= 0, calib_samples >= 1 and grid_points >= 2 required")
        try:
            self.poletsky()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
        if "inner_search" in d and isinstance(d["inner_search"], dict):
            d["inner_search"] = search_config_from_dict(d["inner_search"], INNER_SEARCH)
        return cls(**d)

    def poletsky(self) -> PoletskyConfig:
        return PoletskyConfig(
            disc_degree=self.disc_degree,
            coeff_cap_factor=self.coeff_cap_factor,
            nodes=self.poletsky_nodes,
            starts=self.poletsky_starts,
            refine_steps=self.poletsky_steps,
            seed=self.seed,
        )

    def lower(self) -> LowerBoundConfig:
        return LowerBoundConfig(degree_max=self.lower_degree_max, calib_samples=self.calib_samples, seed=self.seed)


def search_config_from_dict(d: dict | None, base: SearchConfig | None = None) -> SearchConfig:
    base = base or SearchConfig()
    d = dict(d or {})
    known = {f.name for f in fields(SearchConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown search keys: {sorted(unknown)}")
    try:
        return replace(base, **d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class SandwichReport:
    point: np.ndarray
    lower: float
    family_upper: float
    poletsky_upper: float
    gap: float
    lower_witness: LelongCandidate
    upper_witness: str
    clip_flag: bool
    iterates: list = field(default_factory=list)
    family_witness: object = None
    direct_upper: float | None = None
    rigorous: bool = True
    budget_exceeded: bool = False
    notes: list = field(default_factory=list)

    @property
    def sandwich_ok(self) -> bool:
        return bool(
            self.lower - TOL_SANDWICH <= self.poletsky_upper <= self.family_upper + TOL_SANDWICH
            and self.gap >= -TOL_SANDWICH
        )

    def witness_summary(self) -> str:
        return f"lower: {self.lower_witness.describe()}; upper: {self.upper_witness}"

    def to_dict(self) -> dict:
        return {
            "point": [[float(v.real), float(v.imag)] for v in self.point],
            "lower": self.lower,
            "family_upper": self.family_upper,
            "poletsky_upper": self.poletsky_upper,
            "gap": self.gap,
            "direct_upper": self.direct_upper,
            "iterates": [float(v) for v in self.iterates],
            "lower_witness": self.lower_witness.describe(),
            "upper_witness": self.upper_witness,
            "clip_flag": self.clip_flag,
            "rigorous": self.rigorous,
            "budget_exceeded": self.budget_exceeded,
            "sandwich_ok": self.sandwich_ok,
            "notes": list(self.notes),
        }


class GridField:
    """Multilinear interpolation of a field on a regular grid over a box in
    R^{2n}; points outside the box fall back to the exact field."""

    def __init__(self, exact, lo: np.ndarray, hi: np.ndarray, points: int):
        self.exact = exact
        self.lo, self.hi = lo, hi
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
        n = len(lo) // 2
        vals = exact(mesh[:, :n] + 1j * mesh[:, n:]).reshape((points,) * len(lo))
        self.interp = RegularGridInterpolator(axes, vals, method="linear")

    def __call__(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=complex)
        shape = p.shape[:-1]
        flat = p.reshape(-1, p.shape[-1])
        real = np.hstack([flat.real, flat.imag])
        inside = np.all((real >= self.lo) & (real <= self.hi), axis=1)
        out = np.empty(len(flat))
        if np.any(inside):
            out[inside] = self.interp(real[inside])
        if np.any(~inside):
            out[~inside] = self.exact(flat[~inside])
        return out.reshape(shape)


def _fast_disc_objective(z, X, q, d, nodes):
    """Vectorized ``J_q`` of ``[1 + sum a_k zeta^k : z_j + sum b_jk zeta^k]``
    with feasibility checked at the nodes only."""
    n = len(z)
    powers = nodes[:, None] ** np.arange(1, d + 1)

    def unpack(y):
        c = y[: len(y) // 2] + 1j * y[len(y) // 2 :]
        return c.reshape(n + 1, d)

    def f(y):
        C = unpack(y)
        f0 = 1.0 + powers @ C[0]
        if np.min(np.abs(f0)) < 1e-12:
            return np.inf
        img = (z + powers @ C[1:].T) / f0[:, None]
        if not np.all(X.contains(img)):
            return np.inf
        poly = np.r_[1.0 + 0j, C[0]]
        rts = np.roots(poly[::-1]) if np.any(C[0] != 0) else np.empty(0)
        mods = np.abs(rts)
        if np.any(np.abs(mods - 1) < 1e-9):
            return np.inf
        J = -float(np.sum(np.log(mods[mods < 1])))
        return J + float(np.mean(q(img)))

    return f, unpack


def _family_start(params: FamilyDiscParams, d: int) -> np.ndarray:
    z, w, r, s = params.z, params.w, params.r, params.s
    n = len(z)
    C = np.zeros((n + 1, d), dtype=complex)
    C[0, 0] = s / r
    C[1:, 0] = w * s / r + (r / s) * (z - w)
    flat = C.reshape(-1)
    return np.r_[flat.real, flat.imag]


def direct_disc_refine(z, X, q, degree: int = 2, start=None, family_value: float | None = None,
                       seed: int = 0, nodes: int = 1024, maxiter: int | None = None):
    """Local search over rational discs ``f(0) = z`` of component degree <= ``degree``.

    Starts from a family witness (``start``); feasibility ``f(T) in X`` is
    checked at ``nodes`` quadrature nodes. The found disc is re-evaluated
    through the full disc functional. Returns ``(value, components)``
    where ``value <= family_value``; components are ``None`` if nothing
    better was found.
    """
    z = as_point(z)
    n = len(z)
    fam = np.inf if family_value is None else float(family_value)
    if degree < 1 or not isinstance(start, FamilyDiscParams):
        return fam, None
    nodes_arr = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    obj, unpack = _fast_disc_objective(z, X, q, degree, nodes_arr)
    y0 = _family_start(start, degree)
    if not np.isfinite(obj(y0)):
        return fam, None
    res = minimize(obj, y0, method="Nelder-Mead",
                   options={"maxiter": maxiter or 200 * len(y0), "xatol": 1e-12, "fatol": 1e-13, "adaptive": True})
    if not np.isfinite(res.fun) or res.fun >= fam:
        return fam, None
    C = unpack(res.x)
    comps = [np.r_[1.0 + 0j, C[0]]] + [np.r_[z[j], C[j + 1]] for j in range(n)]
    try:
        val = j_q(make_rational_disc(comps), q, X)
    except (DiscError, RootFindingFailure):
        return fam, None
    if not val < fam:
        return fam, None
    return float(val), comps


class Solver:
    """Reusable sandwich solver for one (X, q); memo tables persist across
    queries so neighbouring points share U-evaluations."""

    def __init__(self, X, q, cfg: SolverConfig | None = None, search: SearchConfig | None = None):
        self.X = X
        self.q = q
        self.cfg = cfg or SolverConfig()
        self.search = search or SearchConfig(seed=self.cfg.seed)
        self.q_var, self.shift = q.split_constant()
        self._inner = replace(self.cfg.inner_search, seed=self.cfg.seed)
        self.U0 = MemoField(self._u0, budget=self.cfg.max_evaluations)
        self._levels = None
        self._lower = None

    def _u0(self, Y) -> np.ndarray:
        return np.array([r.value for r in envelope_batch(Y, self.X, self.q_var, self._inner)])

    @property
    def lower_context(self) -> LowerBoundContext:
        if self._lower is None:
            self._lower = LowerBoundContext(self.X, self.q_var, self.cfg.lower())
        return self._lower

    def levels(self) -> list:
        """Fields U_0, ..., U_{ITER-1} (the top iterate is taken at the query)."""
        if self._levels is None:
            base = self.U0
            if self.cfg.interpolation_mode == "grid":
                base = self._grid_field()
            lv = [base]
            for _ in range(1, self.cfg.iter):
                lv.append(StencilIterate(lv[-1], self.cfg.coeff_cap_factor, budget=self.cfg.max_evaluations))
            self._levels = lv
        return self._levels

    def _grid_field(self) -> GridField:
        n = self.X.dim
        if n > 2:
            raise ConfigError("grid interpolation mode supports n <= 2")
        c = self.X.center
        half = 3.0 * (self.X.scale if self.X.bounded else 1.0)
        lo = np.r_[c.real - half, c.imag - half]
        hi = np.r_[c.real + half, c.imag + half]
        return GridField(self.U0, lo, hi, self.cfg.grid_points)

    def solve(self, z) -> SandwichReport:
        z = as_point(z)
        if len(z) != self.X.dim:
            raise ConfigError(f"point has dimension {len(z)}, domain has {self.X.dim}")
        cfg = self.cfg
        fam = envelope_EB(z, self.X, self.q_var, self.search)
        iterates = [fam.value]
        upper_witness = fam.describe()
        exhausted = False
        pcfg = cfg.poletsky()
        hints = [z - self.X.center]
        for m, field_m in enumerate(self.levels()[: cfg.iter]):
            # each stencil level multiplies the cost per point; search them lightly
            res = poletsky_step(field_m, z, pcfg if m == 0 else LIGHT_STEP(pcfg), hints=hints,
                                u_at_z=iterates[-1])
            if res.value < iterates[-1]:
                upper_witness = res.disc.describe()
            iterates.append(min(iterates[-1], res.value))
            if res.exhausted:
                exhausted = True
                break
        lower, cand = self.lower_context.best(z)

        direct = None
        if cfg.direct_refine:
            direct, _ = direct_disc_refine(
                z, self.X, self.q_var, cfg.direct_degree, fam.witness, fam.value, cfg.seed
            )
            direct += self.shift

        c = self.shift
        it = [v + c for v in iterates]
        lo_val = lower + c
        pol = it[-1]
        notes = [f"lower bound calibrated on {len(self.lower_context.sample)} sample points"]
        if cfg.interpolation_mode == "grid":
            notes.append("U_0 interpolated on a grid: upper bound not certified")
        return SandwichReport(
            point=z,
            lower=lo_val,
            family_upper=fam.value + c,
            poletsky_upper=pol,
            gap=pol - lo_val,
            lower_witness=cand.with_offset(cand.offset + c),
            upper_witness=upper_witness,
            clip_flag=bool(fam.clipped or self.lower_context.clipped),
            iterates=it,
            family_witness=fam.witness,
            direct_upper=direct,
            rigorous=cfg.interpolation_mode == "off",
            budget_exceeded=exhausted,
            notes=notes,
        )

    def solve_many(self, Z, threads: int | None = None) -> list[SandwichReport]:
        """Solve at every row of Z; results are in input order."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        threads = threads or worker_count()
        if threads <= 1 or len(Z) <= 1:
            return [self.solve(z) for z in Z]
        self.lower_context  # build shared state before fanning out
        self.levels()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(self.solve, Z))


def worker_count() -> int:
    """Worker pool size: ``EXTREMAL_THREADS`` capped by the CPU count."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get("EXTREMAL_THREADS")
    if raw is None:
        return cpus
    try:
        return max(1, min(int(raw), cpus))
    except ValueError:
        raise ConfigError(f"EXTREMAL_THREADS must be an integer, got {raw!r}") from None


def solve_V(z, X, q, cfg: SolverConfig | None = None, search: SearchConfig | None = None) -> SandwichReport:
    """Sandwich report at a single point (fresh memo tables)."""
    return Solver(X, q, cfg, search).solve(z)
