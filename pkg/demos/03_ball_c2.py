"""
The unit ball in C^2
====================

For the Euclidean unit ball the extremal function is log+||z||. Random
points at several radii show the sandwich width in two variables.
"""

import numpy as np

from extremal.domains import Ball
from extremal.solver import Solver
from extremal.weights import parse_weight

X = Ball(np.zeros(2, complex), 1.0)
solver = Solver(X, parse_weight("0"))
rng = np.random.default_rng(3)

print(f"{'||z||':>6} {'lower':>9} {'upper':>9} {'gap':>9} {'log+':>9}")
for radius in [0.5, 1.5, 2.5]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    z = radius * v / np.linalg.norm(v)
    rep = solver.solve(z)
    print(f"{radius:6.2f} {rep.lower:9.5f} {rep.poletsky_upper:9.5f} {rep.gap:9.2e} {max(np.log(radius), 0):9.5f}")
