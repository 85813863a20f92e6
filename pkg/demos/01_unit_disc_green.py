"""
The unit disc: extremal function vs the Green function
======================================================

For the closed unit disc with q = 0 the extremal function is the Green
function with pole at infinity, log+|z|. We compute the sandwich along a
ray and print it next to the closed form.
"""

import numpy as np

from extremal.domains import Ball
from extremal.solver import Solver
from extremal.weights import parse_weight

X = Ball(np.array([0j]), 1.0)
solver = Solver(X, parse_weight("0"))

print(f"{'|z|':>5} {'lower':>10} {'upper':>10} {'log+|z|':>10}")
for t in [0.0, 0.5, 0.9, 1.1, 1.5, 2.0, 3.0]:
    z = t * np.exp(0.4j)
    rep = solver.solve([z])
    print(f"{t:5.2f} {rep.lower:10.5f} {rep.poletsky_upper:10.5f} {max(np.log(t), 0) if t else 0.0:10.5f}")

# Lower witness: log|z| with a calibrated offset of ~0. Upper witness: the
# family disc through infinity, or a disc-mean disc if that did better.
rep = solver.solve([2.0])
print()
print("witnesses at z = 2:")
print("  ", rep.witness_summary())
