"""Command-line entry point: ``extremal eval | grid | selftest``.

Exit codes: 0 success, 1 invariant failure (or exhausted budget),
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .domains import _cvec, domain_from_dict
from .errors import ConfigError, ExtremalError, ParseError
from .selftest import SUITES, run_selftest
from .solver import SandwichReport, Solver, SolverConfig, search_config_from_dict, worker_count
from .weights import parse_weight

MODES = ("point", "grid", "selftest", "sandwich-sweep")
FAILURE_MARKER = "# FAILED"


@dataclass
class GridAxis:
    coord: int  # 1-based coordinate index
    part: str  # "re" or "im"
    lo: float
    hi: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass
class JobConfig:
    domain: dict
    weight: str
    mode: str = "point"
    z: list = field(default_factory=list)
    axes: list = field(default_factory=list)
    base: list | None = None
    solver: dict = field(default_factory=dict)
    search: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0
    reference: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "JobConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"domain", "weight", "mode", "z", "grid", "solver", "search", "output", "seed", "reference"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "domain" not in d or "weight" not in d:
            raise ConfigError("config needs 'domain' and 'weight'")
        mode = d.get("mode", "point")
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        grid = d.get("grid") or {}
        axes = []
        for a in grid.get("axes", []):
            try:
                ax = GridAxis(int(a.get("coord", 1)), a.get("part", "re"), float(a["min"]), float(a["max"]), int(a["steps"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad grid axis {a!r}: {exc}") from None
            axes.append(ax)
        z = d.get("z", [])
        return cls(
            domain=d["domain"],
            weight=str(d["weight"]),
            mode=mode,
            z=z,
            axes=axes,
            base=grid.get("base"),
            solver=dict(d.get("solver") or {}),
            search=dict(d.get("search") or {}),
            output=d.get("output"),
            seed=int(d.get("seed", 0)),
            reference=d.get("reference"),
        )

    def validate(self, dim: int) -> None:
        if self.mode == "grid":
            if not self.axes:
                raise ConfigError("grid mode needs at least one axis")
            for ax in self.axes:
                if not 1 <= ax.coord <= dim:
                    raise ConfigError(f"grid axis references z{ax.coord} but the domain has dimension {dim}")
                if ax.part not in ("re", "im"):
                    raise ConfigError(f"grid axis part must be 're' or 'im', got {ax.part!r}")
                if ax.steps < 2:
                    raise ConfigError("grid axes need steps >= 2")


def parse_complex_list(text: str) -> list[complex]:
    """``"1+2i, 0.5"`` -> ``[1+2j, 0.5]``; accepts ``i`` or ``j``."""
    out = []
    for item in text.split(","):
        item = item.strip().replace(" ", "").replace("i", "j")
        if not item:
            continue
        try:
            out.append(complex(item))
        except ValueError:
            raise ConfigError(f"cannot parse complex number {item!r}") from None
    if not out:
        raise ConfigError("empty point")
    return out


def grid_points(job: JobConfig, dim: int) -> np.ndarray:
    """Row-major grid (first axis outermost) over a base point."""
    base = _cvec(job.base, dim) if job.base is not None else np.zeros(dim, complex)
    pts = []
    for combo in itertools.product(*(ax.values() for ax in job.axes)):
        p = base.copy()
        for ax, v in zip(job.axes, combo):
            k = ax.coord - 1
            p[k] = complex(v, p[k].imag) if ax.part == "re" else complex(p[k].real, v)
        pts.append(p)
    return np.array(pts)


def _points(raw, dim: int) -> np.ndarray:
    """One point (list of coordinates) or a list of points."""
    try:
        return _cvec(raw, dim)[None, :]
    except (ConfigError, TypeError, ValueError):
        pass
    if isinstance(raw, (list, tuple)) and all(isinstance(p, (list, tuple)) for p in raw):
        return np.array([_cvec(p, dim) for p in raw])
    raise ConfigError(f"cannot read points from {raw!r} for dimension {dim}")


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def csv_header(dim: int, with_reference: bool) -> list[str]:
    cols = []
    for j in range(1, dim + 1):
        cols += [f"re_z{j}", f"im_z{j}"]
    cols += ["lower", "family_upper", "poletsky_upper", "gap", "clip_flag", "witness"]
    if with_reference:
        cols += ["reference", "abs_error"]
    return cols


def csv_row(rep: SandwichReport, reference=None) -> list[str]:
    row = []
    for v in rep.point:
        row += [_fmt(v.real), _fmt(v.imag)]
    row += [_fmt(rep.lower), _fmt(rep.family_upper), _fmt(rep.poletsky_upper), _fmt(rep.gap),
            str(int(rep.clip_flag)), rep.witness_summary()]
    if reference is not None:
        ref = float(reference(rep.point[None, :])[0])
        row += [_fmt(ref), _fmt(abs(rep.poletsky_upper - ref))]
    return row


def build(job: JobConfig, seed_override: int | None = None):
    seed = job.seed if seed_override is None else seed_override
    X = domain_from_dict(job.domain)
    q = parse_weight(job.weight)
    if q.dim_required > X.dim:
        raise ConfigError(f"weight uses z{q.dim_required} but the domain has dimension {X.dim}")
    solver_d = dict(job.solver)
    solver_d.setdefault("seed", seed)
    if seed_override is not None:
        solver_d["seed"] = seed
    cfg = SolverConfig.from_dict(solver_d)
    search_d = dict(job.search)
    search_d.setdefault("seed", cfg.seed)
    if seed_override is not None:
        search_d["seed"] = seed
    search = search_config_from_dict(search_d)
    job.validate(X.dim)
    return Solver(X, q, cfg, search), X


def write_csv(path, reports, dim, reference, failure: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(dim, reference is not None))
    for rep in reports:
        w.writerow(csv_row(rep, reference))
    if failure:
        buf.write(f"{FAILURE_MARKER}: {failure}\n")
    text = buf.getvalue()
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def solve_points(solver: Solver, Z) -> tuple[list, str | None]:
    """Solve in order; stop at the first exhausted budget."""
    reports = []
    threads = worker_count()
    for start in range(0, len(Z), max(threads, 1) * 4):
        chunk = solver.solve_many(Z[start : start + max(threads, 1) * 4], threads)
        for rep in chunk:
            reports.append(rep)
            if rep.budget_exceeded:
                return reports, f"evaluation budget exhausted at row {len(reports)}"
    return reports, None


def run_point(job: JobConfig, z_override=None, seed=None, out=None) -> int:
    out = out or sys.stdout
    solver, X = build(job, seed)
    pts = z_override if z_override is not None else job.z
    if pts is None or len(pts) == 0:
        raise ConfigError("point mode needs 'z' (in the config or via --z)")
    Z = _points(pts, X.dim)
    reports, failure = solve_points(solver, Z)
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload[0] if len(payload) == 1 else payload, indent=2)
    out.write(text + "\n")
    if job.output:
        with open(job.output, "w") as fh:
            fh.write(text + "\n")
    ok = failure is None and all(r.sandwich_ok for r in reports)
    return 0 if ok else 1


def run_grid(job: JobConfig, seed=None, out=None) -> int:
    out = out or sys.stdout
    solver, X = build(job, seed)
    if job.mode == "sandwich-sweep":
        if not job.z:
            raise ConfigError("sandwich-sweep needs a list of points in 'z'")
        Z = _points(job.z, X.dim)
    else:
        if job.mode != "grid":
            job.mode = "grid"
        job.validate(X.dim)
        Z = grid_points(job, X.dim)
    reference = parse_weight(job.reference) if job.reference else None
    reports, failure = solve_points(solver, Z)
    text = write_csv(job.output, reports, X.dim, reference, failure)
    if not job.output:
        out.write(text)
    ok = failure is None and all(r.sandwich_ok for r in reports)
    return 0 if ok else 1


def run_selftest_cmd(seed: int, inject=None, scale: float = 1.0, out=None) -> int:
    out = out or sys.stdout
    results = run_selftest(seed, inject=inject, scale=scale)
    for r in results:
        out.write(r.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} suites passed\n")
    return 1 if failed else 0


def _load(path: str) -> JobConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return JobConfig.from_dict(raw)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extremal", description="Sandwich bounds for the weighted extremal function.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate the sandwich at one or more points")
    e.add_argument("--config", required=True)
    e.add_argument("--z", help="comma-separated complex coordinates, e.g. '1+0.5i,0'")
    e.add_argument("--seed", type=int)
    e.add_argument("--output")

    g = sub.add_parser("grid", help="evaluate on a grid (or point sweep) and write CSV")
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--output")

    s = sub.add_parser("selftest", help="run the invariant suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scale", type=float, default=1.0, help="multiply suite sizes")
    s.add_argument("--inject-failure", choices=sorted(SUITES), help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return run_selftest_cmd(args.seed, args.inject_failure, args.scale)
        job = _load(args.config)
        if args.output:
            job.output = args.output
        if args.command == "eval":
            z = parse_complex_list(args.z) if args.z else None
            return run_point(job, z, args.seed)
        return run_grid(job, args.seed)
    except (ConfigError, ParseError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ExtremalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
