"""
A weighted problem
==================

With q(z) = |z|^2 on the unit disc the weight matters inside X as well
as outside. This script prints the sandwich, then checks that adding a
constant to q shifts every bound by that constant.
"""

import numpy as np

from extremal.domains import Ball
from extremal.solver import Solver
from extremal.weights import parse_weight

X = Ball(np.array([0j]), 1.0)
q = parse_weight("abs(z1)*abs(z1)")
solver = Solver(X, q)

for z in [0.0, 0.5, 1.5, 2.5j]:
    rep = solver.solve([z])
    print(f"z = {z!s:>6}: lower {rep.lower:8.4f}  family {rep.family_upper:8.4f}  poletsky {rep.poletsky_upper:8.4f}")

shifted = Solver(X, parse_weight("abs(z1)*abs(z1) + 1.25"))
a, b = solver.solve([1.5]), shifted.solve([1.5])
print()
print(f"shift check at z = 1.5: {b.poletsky_upper - a.poletsky_upper:.12f} (expected 1.25)")
