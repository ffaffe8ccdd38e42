"""Circle pattern functionals, their dual, Leibon's functional and prism volumes.

Per unoriented edge k the problem stores the faces on either side:
``left[k]`` is the face to the left of oriented edge 4k and ``right[k]`` the
face to the left of 4k+2.  Angle systems have two entries per edge: index 2k
is the half-angle at the centre of ``left[k]``, index 2k+1 the half-angle at
the centre of ``right[k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .specfun import clausen, f_theta, f_theta_derivative, im_li_symmetric
from .surface import SENTINEL, CellularSurface

GEOMETRIES = ("euclidean", "hyperbolic", "spherical")
TWO_PI = 2.0 * math.pi


def _broadcast(value, n: int, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{what} needs {n} entries, got {arr.shape[0] if arr.ndim else 0}")
    return arr.copy()


@dataclass(frozen=True, eq=False)
class PatternProblem:
    """Surface, geometry, intersection angle per edge, cone or Neumann angle per face."""

    surface: CellularSurface
    geometry: str
    theta: np.ndarray
    phi: np.ndarray
    tolerance: float = 1e-10
    left: np.ndarray = field(init=False, repr=False)
    right: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")
        s = self.surface
        theta = _broadcast(self.theta, s.num_edges, "theta")
        phi = _broadcast(self.phi, s.num_faces, "phi")
        if s.num_faces == 0:
            raise ValueError("problem needs at least one face")
        if np.any(~(theta > 0.0)) or np.any(~(theta < math.pi)):
            raise ValueError("theta entries must lie strictly inside (0, pi)")
        if np.any(~(phi > 0.0)) or np.any(~np.isfinite(phi)):
            raise ValueError("phi entries must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        for k in range(s.num_edges):
            if not s.edge_is_interior(k):
                raise ValueError(f"edge {k} is a boundary edge; use boundary faces instead")
        left = np.array([s.face_of[4 * k] // 2 for k in range(s.num_edges)], dtype=np.int64)
        right = np.array([s.face_of[4 * k + 2] // 2 for k in range(s.num_edges)], dtype=np.int64)
        for name, arr in (("theta", theta), ("phi", phi), ("left", left), ("right", right)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_faces(self) -> int:
        return self.surface.num_faces

    @property
    def num_edges(self) -> int:
        return self.surface.num_edges

    @property
    def theta_star(self) -> np.ndarray:
        return math.pi - self.theta

    @property
    def angle_slack(self) -> float:
        """sum 2 theta* - sum Phi (zero is required in the euclidean case)."""
        return float(np.sum(2.0 * self.theta_star) - np.sum(self.phi))

    @property
    def scale_invariant(self) -> bool:
        scale = max(1.0, float(np.sum(self.phi)))
        return abs(self.angle_slack) <= 1e-12 * scale

    @property
    def is_closed(self) -> bool:
        return not self.surface.has_boundary

    def with_geometry(self, geometry: str) -> "PatternProblem":
        return PatternProblem(self.surface, geometry, self.theta, self.phi, self.tolerance)


@dataclass(frozen=True)
class EnergyReport:
    value: float
    gradient: np.ndarray
    gradient_inf_norm: float


def _check_rho(problem: PatternProblem, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (problem.num_faces,):
        raise ValueError(f"rho needs {problem.num_faces} entries")
    return rho


# kite geometry


def kite_half_angle(geometry: str, theta, rho_left, rho_right):
    """Half the kite angle at the centre of the left circle."""
    x = np.asarray(rho_right) - np.asarray(rho_left)
    if geometry == "euclidean":
        return f_theta(theta, x)
    s = np.asarray(rho_right) + np.asarray(rho_left)
    if geometry == "hyperbolic":
        return f_theta(theta, x) - f_theta(theta, s)
    if geometry == "spherical":
        return f_theta(theta, x) + f_theta(math.pi - np.asarray(theta), s)
    raise ValueError(f"unknown geometry {geometry!r}")


def rho_from_half_angles(geometry: str, theta: float, phi1: float, phi2: float):
    """Invert the kite relations.

    Hyperbolic and spherical: returns (rho1, rho2).  Euclidean: returns the
    difference rho2 - rho1 determined by phi1 alone.
    """
    specfun._check_theta(theta)
    star = math.pi - theta
    if geometry == "euclidean":
        if not 0.0 < phi1 < star:
            raise ValueError("euclidean half-angle must lie in (0, pi - theta)")
        return math.log(math.sin(phi1) / math.sin(phi1 + theta))

    def half(a: float, b: float, first_sign: float) -> float:
        num = math.sin(first_sign * (star - a - b) / 2.0) * math.sin((star - a + b) / 2.0)
        den = math.sin((star + a + b) / 2.0) * math.sin((star + a - b) / 2.0)
        return 0.5 * math.log(num / den)

    if geometry == "hyperbolic":
        if not (phi1 > 0 and phi2 > 0 and phi1 + phi2 < star):
            raise ValueError("hyperbolic half-angles need phi > 0 and phi1 + phi2 < pi - theta")
        return half(phi1, phi2, 1.0), half(phi2, phi1, 1.0)
    if geometry == "spherical":
        if not (star < phi1 + phi2 < TWO_PI - star and abs(phi1 - phi2) < star):
            raise ValueError("spherical half-angles outside the admissible region")
        return half(phi1, phi2, -1.0), half(phi2, phi1, -1.0)
    raise ValueError(f"unknown geometry {geometry!r}")


def radius_from_rho(geometry: str, rho):
    rho = np.asarray(rho, dtype=float)
    if geometry == "euclidean":
        return np.exp(rho)
    if geometry == "hyperbolic":
        if np.any(rho >= 0):
            raise ValueError("hyperbolic rho must be negative")
        return 2.0 * np.arctanh(np.exp(rho))
    if geometry == "spherical":
        return 2.0 * np.arctan(np.exp(rho))
    raise ValueError(f"unknown geometry {geometry!r}")


def rho_from_radius(geometry: str, r):
    r = np.asarray(r, dtype=float)
    if geometry == "euclidean":
        return np.log(r)
    if geometry == "hyperbolic":
        return np.log(np.tanh(0.5 * r))
    if geometry == "spherical":
        return np.log(np.tan(0.5 * r))
    raise ValueError(f"unknown geometry {geometry!r}")


def half_angles(problem: PatternProblem, rho) -> np.ndarray:
    """Half-angle for each side of each edge (layout of the module docstring)."""
    rho = _check_rho(problem, rho)
    rl, rr = rho[problem.left], rho[problem.right]
    out = np.empty(2 * problem.num_edges)
    if problem.num_edges:
        out[0::2] = kite_half_angle(problem.geometry, problem.theta, rl, rr)
        out[1::2] = kite_half_angle(problem.geometry, problem.theta, rr, rl)
    return out


def face_angle_sums(problem: PatternProblem, phi_half: np.ndarray) -> np.ndarray:
    """sum of 2 phi over the sides of each face."""
    sums = np.zeros(problem.num_faces)
    np.add.at(sums, problem.left, 2.0 * phi_half[0::2])
    np.add.at(sums, problem.right, 2.0 * phi_half[1::2])
    return sums


# functionals


def _edge_terms(problem: PatternProblem, rho: np.ndarray) -> np.ndarray:
    theta = problem.theta
    rl, rr = rho[problem.left], rho[problem.right]
    x, s = rr - rl, rr + rl
    terms = im_li_symmetric(x, theta) if problem.num_edges else np.zeros(0)
    terms = np.asarray(terms, dtype=float)
    if problem.geometry == "euclidean":
        return terms - (math.pi - theta) * s
    if problem.geometry == "hyperbolic":
        return terms + im_li_symmetric(s, theta)
    return terms - im_li_symmetric(s, math.pi - theta) - math.pi * s


def energy_value(problem: PatternProblem, rho) -> float:
    rho = _check_rho(problem, rho)
    return float(np.sum(_edge_terms(problem, rho)) + np.dot(problem.phi, rho))


def energy_gradient(problem: PatternProblem, rho) -> np.ndarray:
    rho = _check_rho(problem, rho)
    return problem.phi - face_angle_sums(problem, half_angles(problem, rho))


def energy_eval(problem: PatternProblem, rho) -> EnergyReport:
    """Functional value and gradient (Phi_f - 2 sum phi) at rho."""
    rho = _check_rho(problem, rho)
    grad = energy_gradient(problem, rho)
    return EnergyReport(energy_value(problem, rho), grad,
                        float(np.max(np.abs(grad))) if grad.size else 0.0)


def hessian_form(problem: PatternProblem, rho, direction) -> float:
    """Second derivative of the functional at rho along ``direction``."""
    rho = _check_rho(problem, rho)
    d = np.asarray(direction, dtype=float)
    if d.shape != rho.shape:
        raise ValueError("direction needs one entry per face")
    theta = problem.theta
    rl, rr = rho[problem.left], rho[problem.right]
    dx = d[problem.right] - d[problem.left]
    ds = d[problem.right] + d[problem.left]
    total = np.sum(2.0 * f_theta_derivative(theta, rr - rl) * dx * dx) if theta.size else 0.0
    if problem.geometry == "hyperbolic":
        total += np.sum(2.0 * f_theta_derivative(theta, rr + rl) * ds * ds)
    elif problem.geometry == "spherical":
        total -= np.sum(2.0 * f_theta_derivative(math.pi - theta, rr + rl) * ds * ds)
    return float(total)


def hessian_matrix(problem: PatternProblem, rho) -> np.ndarray:
    rho = _check_rho(problem, rho)
    n = problem.num_faces
    H = np.zeros((n, n))
    theta = problem.theta
    rl, rr = rho[problem.left], rho[problem.right]
    wx = 2.0 * f_theta_derivative(theta, rr - rl) if theta.size else np.zeros(0)
    if problem.geometry == "euclidean":
        ws = np.zeros_like(wx)
    elif problem.geometry == "hyperbolic":
        ws = 2.0 * f_theta_derivative(theta, rr + rl)
    else:
        ws = -2.0 * f_theta_derivative(math.pi - theta, rr + rl)
    for k in range(problem.num_edges):
        i, j = problem.left[k], problem.right[k]
        for (a, b, sgn) in ((i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)):
            H[a, b] += wx[k] * sgn
        for (a, b) in ((i, i), (j, j), (i, j), (j, i)):
            H[a, b] += ws[k]
    return H


# spherical reduction


class BracketError(RuntimeError):
    """The inner maximisation along the constant direction has no bracket."""


def total_area(problem: PatternProblem) -> float:
    """Area of the spherical surface from Gauss-Bonnet: sum Phi - sum 2 theta*."""
    return float(np.sum(problem.phi) - np.sum(2.0 * problem.theta_star))


def kite_area_sum(problem: PatternProblem, rho) -> float:
    rho = _check_rho(problem, rho)
    s = rho[problem.left] + rho[problem.right]
    return float(np.sum(4.0 * f_theta(problem.theta_star, s))) if s.size else 0.0


def area_defect(problem: PatternProblem, rho) -> float:
    """A - A(rho): derivative of the spherical functional along the constant direction."""
    if problem.geometry != "spherical":
        raise ValueError("area defect is defined for spherical problems")
    if not problem.is_closed:
        raise ValueError("area defect needs a closed surface")
    return total_area(problem) - kite_area_sum(problem, rho)


def _shift_slope(problem: PatternProblem, rho: np.ndarray, t: float) -> float:
    return total_area(problem) - kite_area_sum(problem, rho + t)


def _shift_curvature(problem: PatternProblem, rho: np.ndarray, t: float) -> float:
    s = rho[problem.left] + rho[problem.right] + 2.0 * t
    return -float(np.sum(8.0 * f_theta_derivative(problem.theta_star, s)))


def optimal_shift(problem: PatternProblem, rho, bracket: float = 40.0,
                  tol: float = 1e-14) -> float:
    """Maximiser t* of t -> S_sph(rho + t), found by safeguarded Newton steps."""
    rho = _check_rho(problem, rho)
    if problem.geometry != "spherical":
        raise ValueError("optimal shift applies to spherical problems")
    centre = float(np.mean(rho))
    base = rho - centre
    lo, hi = -bracket, bracket
    g_lo, g_hi = _shift_slope(problem, base, lo), _shift_slope(problem, base, hi)
    if not (g_lo > 0.0 > g_hi):
        raise BracketError(
            f"no sign change of the area defect on [{lo}, {hi}] (slopes {g_lo:.3g}, {g_hi:.3g})")
    t = 0.0
    for _ in range(200):
        g = _shift_slope(problem, base, t)
        if g > 0:
            lo = t
        else:
            hi = t
        if abs(g) <= tol * max(1.0, abs(total_area(problem))) or hi - lo < 1e-15:
            break
        h = _shift_curvature(problem, base, t)
        step = t - g / h if h < 0 else 0.5 * (lo + hi)
        t = step if lo < step < hi else 0.5 * (lo + hi)
    return t - centre


def spherical_reduced(problem: PatternProblem, rho) -> tuple[float, float]:
    """(max_t S_sph(rho + t), t*)."""
    rho = _check_rho(problem, rho)
    t = optimal_shift(problem, rho)
    return energy_value(problem, rho + t), t


# dual functional


def _four_clausen(theta_star, a, b):
    return (clausen(theta_star + a - b) + clausen(theta_star - a + b)
            + clausen(theta_star + a + b) + clausen(theta_star - a - b))


def s_hat(problem: PatternProblem, phi_half) -> float:
    """Dual functional of the half-angles (one entry per edge side)."""
    phi_half = np.asarray(phi_half, dtype=float)
    if phi_half.shape != (2 * problem.num_edges,):
        raise ValueError("angle system needs two entries per edge")
    ts = problem.theta_star
    a, b = phi_half[0::2], phi_half[1::2]
    return float(np.sum(_four_clausen(ts, a, b) - 2.0 * clausen(2.0 * ts)))


def s_hat_euclidean_reduced(problem: PatternProblem, phi_half) -> float:
    """Simplified dual functional valid when phi + phi' = theta* on each edge."""
    phi_half = np.asarray(phi_half, dtype=float)
    ts = problem.theta_star
    return float(np.sum(clausen(2.0 * phi_half[0::2]) + clausen(2.0 * phi_half[1::2])
                        - clausen(2.0 * ts)))


def s_hat_gradient(problem: PatternProblem, phi_half) -> np.ndarray:
    """Partial derivatives of the dual functional in each half-angle."""
    phi_half = np.asarray(phi_half, dtype=float)
    ts = problem.theta_star
    a, b = phi_half[0::2], phi_half[1::2]

    def dcl(x):
        return -np.log(np.abs(2.0 * np.sin(0.5 * x)))

    da = dcl(ts + a - b) - dcl(ts - a + b) + dcl(ts + a + b) - dcl(ts - a - b)
    db = -dcl(ts + a - b) + dcl(ts - a + b) + dcl(ts + a + b) - dcl(ts - a - b)
    out = np.empty_like(phi_half)
    out[0::2], out[1::2] = da, db
    return out


# Leibon's functional


def leibon_v(a1, a2, a3):
    """Volume-type function of a hyperbolic triangle with angles a1, a2, a3."""
    return 0.5 * (clausen(2 * a1) + clausen(2 * a2) + clausen(2 * a3)
                  + clausen(math.pi + a1 - a2 - a3) + clausen(math.pi - a1 + a2 - a3)
                  + clausen(math.pi - a1 - a2 + a3) + clausen(math.pi - a1 - a2 - a3))


def leibon_side_length(a1: float, a2: float, a3: float) -> float:
    """Side opposite a1 from the hyperbolic angle cosine theorem."""
    c = (math.cos(a2) * math.cos(a3) + math.cos(a1)) / (math.sin(a2) * math.sin(a3))
    return math.acosh(c)


def leibon_v_side_derivative(a1: float, a2: float, a3: float) -> float:
    """(d/da2 + d/da3) V in closed form."""
    s = a1 + a2 + a3
    return math.log(math.cos(0.5 * s) * math.cos(0.5 * (-a1 + a2 + a3))
                    / (math.sin(a2) * math.sin(a3)))


def triangle_sides(surface: CellularSurface) -> list[list[int]]:
    """For each face, its three edge-side indices (2k or 2k+1)."""
    out = []
    for f in range(surface.num_faces):
        edges = surface.face_edges(2 * f)
        if len(edges) != 3 or surface.is_boundary_face(f):
            raise ValueError(f"face {f} is not a triangle")
        out.append([2 * (x // 4) + (0 if (x & 3) in (0, 3) else 1) for x in edges])
    return out


def leibon_h(surface: CellularSurface, alpha) -> float:
    """Sum of V over all triangles; alpha holds one angle per edge side."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (2 * surface.num_edges,):
        raise ValueError("alpha needs two entries per edge")
    if np.any(alpha <= 0):
        raise ValueError("alpha must be positive")
    total = 0.0
    for sides in triangle_sides(surface):
        total += leibon_v(*alpha[sides])
    return float(total)


# prism and orthoscheme volumes


def vp_euclidean(theta: float, phi1: float, phi2: float) -> float:
    return 0.5 * clausen(2 * phi1) + 0.5 * clausen(2 * phi2)


def vp_hyperbolic(theta: float, phi1: float, phi2: float) -> float:
    ts = math.pi - theta
    return float(_four_clausen(ts, phi1, phi2) - 2.0 * clausen(2 * ts))


def vp_spherical(theta: float, phi1: float, phi2: float) -> float:
    return 0.5 * vp_hyperbolic(theta, phi1, phi2)


def volume_regime(theta: float, phi1: float, phi2: float, band: float = 1e-12) -> str:
    ts = math.pi - theta
    gap = phi1 + phi2 - ts
    if abs(gap) <= band:
        return "euclidean"
    return "hyperbolic" if gap < 0 else "spherical"


def volume_p(theta: float, phi1: float, phi2: float) -> float:
    """Volume of the ideal prism-type polyhedron attached to one edge."""
    specfun._check_theta(theta)
    ts = math.pi - theta
    regime = volume_regime(theta, phi1, phi2)
    if regime == "euclidean":
        if not (phi1 > 0 and phi2 > 0):
            raise ValueError("half-angles must be positive")
        return vp_euclidean(theta, phi1, phi2)
    if regime == "hyperbolic":
        if not (phi1 > 0 and phi2 > 0):
            raise ValueError("half-angles must be positive")
        return vp_hyperbolic(theta, phi1, phi2)
    if not (0 < phi1 < math.pi and 0 < phi2 < math.pi
            and phi1 + phi2 < math.pi + theta and abs(phi1 - phi2) < ts):
        raise ValueError("half-angles outside the spherical region")
    return vp_spherical(theta, phi1, phi2)


def orthoscheme_volume(alpha: float, beta: float) -> float:
    if not (0 < alpha <= beta < 0.5 * math.pi):
        raise ValueError("need 0 < alpha <= beta < pi/2")
    return 0.125 * (2 * clausen(math.pi - 2 * alpha) + clausen(2 * alpha - 2 * beta)
                    + clausen(2 * alpha + 2 * beta))


def orthoscheme_volume_derivative(alpha: float, beta: float) -> float:
    """d/dalpha of the orthoscheme volume."""
    return -0.25 * math.log(1.0 - (math.cos(beta) / math.cos(alpha)) ** 2)


def orthoscheme_volume_two_ideal(alpha: float) -> float:
    """Orthoscheme with two ideal vertices and characteristic angle alpha."""
    if not 0 < alpha < 0.5 * math.pi:
        raise ValueError("need 0 < alpha < pi/2")
    return 0.25 * clausen(2 * alpha)
