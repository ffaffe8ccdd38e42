"""Orthogonal-style circle pattern on the cube, drawn on the sphere.

Solves the spherical problem with 2*pi/3 intersection angles, lays the six
circles out, and prints their spherical radii next to the exact value.
"""

import math

import numpy as np

from circlepatterns import layout, surface
from circlepatterns.energy import PatternProblem
from circlepatterns.solver import solve

problem = PatternProblem(surface.cube(), "spherical", 2 * math.pi / 3, 2 * math.pi)
result = solve(problem, np.zeros(problem.num_faces))
print(f"status {result.status} after {result.iterations} iterations, "
      f"gradient {result.gradient_inf_norm:.1e}")

pattern = layout.layout_pattern(problem, result.rho)
radii = [c.radius("spherical") for c in pattern.circles if c is not None]
print("radii      ", np.round(radii, 12))
print("exact value", round(math.acos(1 / math.sqrt(3)), 12))

check = layout.check_layout(problem, result.rho, pattern)
print(f"worst layout defect {check.worst:.1e}, holonomy {pattern.holonomy_residual:.1e}")
