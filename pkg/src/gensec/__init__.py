"""Inexact Broyden secant-type solver for constrained mixed generalized equations."""

from gensec.bench import registry, run_bench
from gensec.feasible_set import Ball, Box, Polytope, Simplex, WholeSpace, condg_project, verify_inexact_projection
from gensec.setvalued import CustomTerm, NormalConeBox, ProductCone, Zero
from gensec.solver import ProblemSpec, SolverConfig, solve

__all__ = [
    "Ball",
    "Box",
    "CustomTerm",
    "NormalConeBox",
    "Polytope",
    "ProblemSpec",
    "ProductCone",
    "Simplex",
    "SolverConfig",
    "WholeSpace",
    "Zero",
    "condg_project",
    "registry",
    "run_bench",
    "solve",
    "verify_inexact_projection",
]
