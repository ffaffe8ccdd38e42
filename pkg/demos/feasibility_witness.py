"""Flow-based feasibility test and its obstruction.

A cube with one face demanding a very large cone angle cannot be realised.
The max-flow computation reports the offending face set; relaxing the demand
makes the problem feasible again.
"""

import math

import numpy as np

from circlepatterns import surface
from circlepatterns.coherent import feasibility
from circlepatterns.energy import PatternProblem

cube = surface.cube()
phi = np.full(cube.num_faces, 0.2)
for demand in (9.0, 2.0):
    phi[0] = demand
    report = feasibility(PatternProblem(cube, "hyperbolic", 2 * math.pi / 3, phi))
    print(f"face 0 demand {demand}: feasible={report.feasible}, margin {report.epsilon:.3f}, "
          f"witness {report.witness_faces}")
