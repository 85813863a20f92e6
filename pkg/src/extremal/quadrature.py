"""Trapezoidal quadrature on the unit circle with normalized arc length."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_NODES = 256
MAX_NODES = 8192
ADAPTIVE_TOL = 1e-8


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class QuadratureRule:
    """Uniform rule on the N-th roots of unity, each weighted 1/N.

    Exact for trigonometric polynomials of degree < N, and spectrally
    accurate for smooth periodic integrands.
    """

    node_count: int = DEFAULT_NODES
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 8 or not _is_power_of_two(n):
            raise ValueError(f"node_count must be a power of two >= 8, got {n}")
        nodes = np.exp(2j * np.pi * np.arange(n) / n)
        weights = np.full(n, 1.0 / n)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def mean(self, values) -> float:
        """Weighted mean of samples taken at ``self.nodes`` (last axis)."""
        return np.mean(values, axis=-1)


def adaptive_mean(
    integrand: Callable[[np.ndarray], np.ndarray],
    start: int = DEFAULT_NODES,
    tol: float = ADAPTIVE_TOL,
    max_nodes: int = MAX_NODES,
) -> tuple[float, int, bool]:
    """Circle mean of ``integrand`` with node doubling.

    Doubling reuses the previous samples (the old nodes are the even
    nodes of the refined rule). Stops once two successive means differ by
    less than ``tol``.

    Returns
    -------
    mean, node_count, converged
    """
    n = start
    vals = np.asarray(integrand(QuadratureRule(n).nodes), dtype=float)
    total = vals.sum()
    prev = total / n
    while n < max_nodes:
        odd = np.exp(2j * np.pi * (2 * np.arange(n) + 1) / (2 * n))
        total = total + np.asarray(integrand(odd), dtype=float).sum()
        n *= 2
        cur = total / n
        if abs(cur - prev) < tol or (np.isinf(cur) and cur == prev):
            return float(cur), n, True
        prev = cur
    return float(prev), n, False
