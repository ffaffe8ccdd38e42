"""Delaunay-type circle patterns on cellular surfaces.

Solvability tests, variational solvers in euclidean, hyperbolic and
spherical geometry, geometric layout and dual-functional certificates.
"""

from .surface import CellularSurface, Subcomplex, SENTINEL
from .energy import PatternProblem, EnergyReport
from .solver import SolveResult, minimize, solve_spherical, solve

__all__ = [
    "CellularSurface",
    "Subcomplex",
    "SENTINEL",
    "PatternProblem",
    "EnergyReport",
    "SolveResult",
    "minimize",
    "solve_spherical",
    "solve",
]

__version__ = "0.1.0"
