"""Weighted Siciak-Zahariuta extremal functions computed by disc envelopes."""

from .domains import Annulus, Ball, Box, FullSpace, Generic, Polydisc, domain_from_dict
from .solver import SandwichReport, Solver, SolverConfig, solve_V
from .weights import parse_weight

__version__ = "0.1.0"

__all__ = [
    "Annulus",
    "Ball",
    "Box",
    "FullSpace",
    "Generic",
    "Polydisc",
    "SandwichReport",
    "Solver",
    "SolverConfig",
    "domain_from_dict",
    "parse_weight",
    "solve_V",
]
