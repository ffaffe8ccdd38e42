"""Geometric layout of circle patterns with Möbius-matrix kinematics.

All three geometries are modelled on the extended complex plane: the
euclidean plane itself, the Poincaré disc, and the sphere through
stereographic projection z = (x1 + i x2) / (1 - x3) (the south pole is 0).
In every model a circle of radius r about 0 has model radius e^rho, where
rho is the log-radius variable of the geometry.
"""

from __future__ import annotations

import cmath
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .energy import PatternProblem, energy_gradient, half_angles
from .surface import SENTINEL, iota, is_simply_connected

GEOMETRIES = ("euclidean", "hyperbolic", "spherical")


# projective points and Möbius maps


@dataclass(frozen=True)
class ProjectivePoint:
    """Homogeneous pair (z1, z2) standing for z1 / z2."""

    z1: complex
    z2: complex

    def __post_init__(self):
        if self.z1 == 0 and self.z2 == 0:
            raise ValueError("homogeneous coordinates cannot both vanish")

    @classmethod
    def from_complex(cls, z) -> "ProjectivePoint":
        if z is None or (isinstance(z, float) and math.isinf(z)):
            return cls(1.0, 0.0)
        return cls(complex(z), 1.0)

    @classmethod
    def infinity(cls) -> "ProjectivePoint":
        return cls(1.0, 0.0)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.z1, self.z2], dtype=complex)

    def normalized(self) -> "ProjectivePoint":
        m = max(abs(self.z1), abs(self.z2))
        return ProjectivePoint(self.z1 / m, self.z2 / m)

    def is_infinite(self, tol: float = 1e-14) -> bool:
        p = self.normalized()
        return abs(p.z2) <= tol

    def to_complex(self) -> complex:
        """Affine coordinate; complex infinity for the point at infinity."""
        if self.z2 == 0:
            return complex(math.inf, math.inf)
        return complex(self.z1 / self.z2)

    def distance_to(self, other: "ProjectivePoint") -> float:
        """Chordal distance on the Riemann sphere."""
        a, b = self.vector, other.vector
        num = abs(a[0] * b[1] - a[1] * b[0])
        return 2.0 * num / (np.linalg.norm(a) * np.linalg.norm(b))


def _unit_max(m: np.ndarray) -> np.ndarray:
    return m / np.max(np.abs(m))


class MoebiusMap:
    """Projective class of an invertible complex 2x2 matrix."""

    __slots__ = ("matrix",)

    def __init__(self, a, b=None, c=None, d=None):
        if b is None:
            m = np.array(a, dtype=complex).reshape(2, 2)
        else:
            m = np.array([[a, b], [c, d]], dtype=complex)
        if not np.all(np.isfinite(m)):
            raise ValueError("Möbius matrix entries must be finite")
        if abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) <= 1e-300:
            raise ValueError("Möbius matrix is singular")
        self.matrix = _unit_max(m)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(np.eye(2))

    @property
    def entries(self) -> tuple[complex, complex, complex, complex]:
        m = self.matrix
        return complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1])

    def determinant(self) -> complex:
        a, b, c, d = self.entries
        return a * d - b * c

    def unimodular(self) -> np.ndarray:
        """Representative with determinant 1 (sign ambiguity remains)."""
        return self.matrix / cmath.sqrt(self.determinant())

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        a, b, c, d = self.entries
        return MoebiusMap([[d, -b], [-c, a]])

    def __call__(self, point):
        if isinstance(point, ProjectivePoint):
            v = self.matrix @ point.vector
            return ProjectivePoint(complex(v[0]), complex(v[1])).normalized()
        p = self(ProjectivePoint.from_complex(point))
        return p.to_complex()

    def act_on_circle(self, circle: "HermitianCircle") -> "HermitianCircle":
        """Image of a circle: M^-* H M^-1."""
        inv = self.inverse().matrix
        return HermitianCircle(inv.conj().T @ circle.matrix @ inv)

    def distance(self, other: "MoebiusMap") -> float:
        """Distance between projective classes of unimodular representatives."""
        a, b = self.unimodular(), other.unimodular()
        return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))

    def is_spherical_isometry(self, tol: float = 1e-12) -> bool:
        a, b, c, d = self.unimodular().ravel()
        return abs(a - d.conjugate()) <= tol and abs(b + c.conjugate()) <= tol

    def is_hyperbolic_isometry(self, tol: float = 1e-12) -> bool:
        a, b, c, d = self.unimodular().ravel()
        return abs(a - d.conjugate()) <= tol and abs(b - c.conjugate()) <= tol

    def __repr__(self) -> str:
        return f"MoebiusMap({self.matrix.tolist()})"


def rotation(angle: float) -> MoebiusMap:
    """Rotation by ``angle`` about 0; an isometry in every model."""
    h = 0.5 * angle
    return MoebiusMap(np.diag([cmath.exp(1j * h), cmath.exp(-1j * h)]))


def translation(geometry: str, model_distance: float) -> MoebiusMap:
    """Isometry along the real axis taking 0 to the model point ``model_distance``.

    The model point of a circle of log-radius rho is e^rho in every geometry.
    """
    t = float(model_distance)
    if geometry == "euclidean":
        return MoebiusMap([[1.0, t], [0.0, 1.0]])
    if geometry == "hyperbolic":
        if not abs(t) < 1.0:
            raise ValueError("hyperbolic model point must lie inside the unit disc")
        return MoebiusMap([[1.0, t], [t, 1.0]])
    if geometry == "spherical":
        return MoebiusMap([[1.0, t], [-t, 1.0]])
    raise ValueError(f"unknown geometry {geometry!r}")


def isometry_from_origin(geometry: str, point: ProjectivePoint) -> MoebiusMap:
    """An isometry taking 0 to ``point``."""
    if geometry == "spherical" and point.is_infinite():
        return MoebiusMap([[0.0, 1.0], [-1.0, 0.0]])
    if point.is_infinite():
        raise ValueError("the point at infinity is not in this geometry")
    p = point.to_complex()
    if geometry == "euclidean":
        return MoebiusMap([[1.0, p], [0.0, 1.0]])
    if geometry == "hyperbolic":
        if not abs(p) < 1.0:
            raise ValueError("hyperbolic point must lie in the unit disc")
        return MoebiusMap([[1.0, p], [p.conjugate(), 1.0]])
    if geometry == "spherical":
        return MoebiusMap([[1.0, p], [-p.conjugate(), 1.0]])
    raise ValueError(f"unknown geometry {geometry!r}")


def moebius_from_three_points(src, dst) -> MoebiusMap:
    """The unique map sending three distinct points to three distinct points."""
    def to_standard(points) -> np.ndarray:
        p1, p2, p3 = (p if isinstance(p, ProjectivePoint) else ProjectivePoint.from_complex(p)
                      for p in points)

        def det(u, w):
            return u.z1 * w.z2 - u.z2 * w.z1

        c1, c3 = det(p2, p3), det(p2, p1)
        if abs(c1) < 1e-300 or abs(c3) < 1e-300 or abs(det(p1, p3)) < 1e-300:
            raise ValueError("points must be distinct")
        # sends p1 -> 0, p2 -> 1, p3 -> infinity
        return np.array([[c1 * p1.z2, -c1 * p1.z1], [c3 * p3.z2, -c3 * p3.z1]])

    a = MoebiusMap(to_standard(src))
    b = MoebiusMap(to_standard(dst))
    return b.inverse() @ a


# Hermitian circles


def _polar(h1: np.ndarray, h2: np.ndarray) -> float:
    """Polar form of the determinant on Hermitian matrices."""
    return float(0.5 * (h1[0, 0] * h2[1, 1] + h2[0, 0] * h1[1, 1]).real
                 - (h1[0, 1] * h2[0, 1].conjugate()).real)


class HermitianCircle:
    """Circle as the zero set of z* H z for a Hermitian H with det H < 0."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex).reshape(2, 2)
        m = 0.5 * (m + m.conj().T)
        scale = np.max(np.abs(m))
        if scale == 0:
            raise ValueError("zero matrix is not a circle")
        m = m / scale
        if not _polar(m, m) < 0:
            raise ValueError("Hermitian circle needs negative determinant")
        self.matrix = m

    @classmethod
    def from_list(cls, values) -> "HermitianCircle":
        h11, re12, im12, h22 = values
        b = complex(re12, im12)
        return cls([[h11, b], [b.conjugate(), h22]])

    def to_list(self) -> list[float]:
        m = self.matrix
        return [float(m[0, 0].real), float(m[0, 1].real), float(m[0, 1].imag),
                float(m[1, 1].real)]

    @property
    def determinant(self) -> float:
        return _polar(self.matrix, self.matrix)

    def form(self, point: ProjectivePoint) -> float:
        v = point.normalized().vector
        return float((v.conj() @ self.matrix @ v).real)

    def contains(self, point: ProjectivePoint, tol: float = 1e-9) -> bool:
        return abs(self.form(point)) <= tol

    def is_line(self, tol: float = 1e-12) -> bool:
        return abs(self.matrix[0, 0]) <= tol

    def euclidean_center_radius(self) -> tuple[complex, float]:
        """Centre and radius in the plane; raises for lines."""
        if self.is_line():
            raise ValueError("circle is a straight line")
        a = self.matrix[0, 0].real
        return complex(-self.matrix[0, 1] / a), math.sqrt(-self.determinant) / abs(a)

    def radius(self, geometry: str) -> float:
        """Radius measured in the given geometry."""
        det = self.determinant
        if geometry == "euclidean":
            return self.euclidean_center_radius()[1]
        if geometry == "hyperbolic":
            j = np.diag([1.0, -1.0])
            coth = -_polar(self.matrix, j) / math.sqrt(det * -1.0)
            if not coth > 1.0:
                raise ValueError("circle is not contained in the Poincaré disc")
            return math.atanh(1.0 / coth)
        if geometry == "spherical":
            cot = _polar(self.matrix, np.eye(2)) / math.sqrt(-det)
            return math.atan2(1.0, cot)
        raise ValueError(f"unknown geometry {geometry!r}")

    def __repr__(self) -> str:
        return f"HermitianCircle({self.to_list()})"


def model_radius(geometry: str, radius: float) -> float:
    if geometry == "euclidean":
        if not radius > 0:
            raise ValueError("radius must be positive")
        return radius
    if geometry == "hyperbolic":
        if not radius > 0 or not math.isfinite(radius):
            raise ValueError("hyperbolic radius must be positive and finite")
        return math.tanh(0.5 * radius)
    if geometry == "spherical":
        if not 0.0 < radius < math.pi:
            raise ValueError("spherical radius must lie in (0, pi)")
        return math.tan(0.5 * radius)
    raise ValueError(f"unknown geometry {geometry!r}")


def _origin_circle(model: float) -> HermitianCircle:
    return HermitianCircle(np.diag([1.0, -model * model]))


def circle_from_center_radius(geometry: str, center, radius: float) -> HermitianCircle:
    """Metric circle with the given centre and radius."""
    center = center if isinstance(center, ProjectivePoint) else ProjectivePoint.from_complex(center)
    model = model_radius(geometry, radius)
    return isometry_from_origin(geometry, center).act_on_circle(_origin_circle(model))


def paired_point(geometry: str, center) -> ProjectivePoint:
    """Second fixed point of the rotations about ``center``."""
    c = center if isinstance(center, ProjectivePoint) else ProjectivePoint.from_complex(center)
    if geometry == "euclidean":
        return ProjectivePoint.infinity()
    # inversion in the unit circle, and additionally z -> -z for the antipode
    sign = 1.0 if geometry == "hyperbolic" else -1.0
    return ProjectivePoint(sign * complex(c.z2).conjugate(), complex(c.z1).conjugate()).normalized()


def intersection_angle(first: HermitianCircle, second: HermitianCircle) -> float:
    """Angle between the radii at an intersection point, in [0, pi]."""
    b = _polar(first.matrix, second.matrix)
    denom = math.sqrt(first.determinant * second.determinant)
    cos_angle = -b / denom
    if abs(cos_angle) > 1.0 + 1e-12:
        raise ValueError("circles do not intersect")
    return math.acos(max(-1.0, min(1.0, cos_angle)))


# stereographic projection


def stereographic(direction: str, point):
    """``sphere_to_plane``: 3-vector -> ProjectivePoint; ``plane_to_sphere``: the reverse."""
    if direction == "sphere_to_plane":
        x = np.asarray(point, dtype=float)
        if x.shape != (3,):
            raise ValueError("sphere point needs three coordinates")
        # |z|^2 = (1 - x3)(1 + x3) gives a stable form near the north pole
        z = complex(x[0], x[1])
        if x[2] > 0:
            return ProjectivePoint(1.0 + x[2], z.conjugate()).normalized()
        return ProjectivePoint(z, 1.0 - x[2]).normalized()
    if direction == "plane_to_sphere":
        p = point if isinstance(point, ProjectivePoint) else ProjectivePoint.from_complex(point)
        p = p.normalized()
        z1, z2 = complex(p.z1), complex(p.z2)
        n1, n2 = abs(z1) ** 2, abs(z2) ** 2
        w = z1 * z2.conjugate()
        return np.array([2.0 * w.real, 2.0 * w.imag, n1 - n2]) / (n1 + n2)
    raise ValueError("direction must be 'sphere_to_plane' or 'plane_to_sphere'")


# normalisation of point sets on the sphere


def _ball_isometry(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Möbius automorphism of the unit ball taking a to 0, applied to rows of x."""
    aa = float(a @ a)
    diff = x - a
    dd = np.sum(diff * diff, axis=1, keepdims=True)
    num = (1.0 - aa) * diff - dd * a
    den = 1.0 - 2.0 * (x @ a)[:, None] + aa * np.sum(x * x, axis=1, keepdims=True)
    return num / den


def _busemann_sum(points: np.ndarray, a: np.ndarray) -> float:
    aa = float(a @ a)
    return float(np.sum(np.log(np.sum((a - points) ** 2, axis=1) / (1.0 - aa))))


def normalize_moebius(points, tol: float = 1e-13, max_iter: int = 200) -> MoebiusMap:
    """Möbius map T with sum of T(v_j) = 0, for unit vectors v_j.

    Newton's method on the sum of horospherical distances over the ball,
    recentring the point set after every step.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an (n, 3) array")
    if pts.shape[0] < 3:
        raise ValueError("need at least three points")
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    np.fill_diagonal(gaps, np.inf)
    if np.min(gaps) < 1e-12:
        raise ValueError("points must be distinct")
    n = pts.shape[0]
    current = pts.copy()
    for _ in range(max_iter):
        total = current.sum(axis=0)
        if np.linalg.norm(total) <= tol * n:
            break
        hess = 4.0 * (n * np.eye(3) - current.T @ current)
        step = np.linalg.solve(hess, 2.0 * total)
        f0 = _busemann_sum(current, np.zeros(3))
        scale = 1.0
        while True:
            trial = scale * step
            if trial @ trial < 1.0:
                # near the minimum the objective decrease drops below roundoff,
                # so a shrinking residual also counts as progress
                if _busemann_sum(current, trial) <= f0:
                    break
                moved = _ball_isometry(trial, current)
                moved /= np.linalg.norm(moved, axis=1, keepdims=True)
                if np.linalg.norm(moved.sum(axis=0)) < np.linalg.norm(total):
                    break
            scale *= 0.5
            if scale < 1e-12:
                raise RuntimeError("normalisation line search failed")
        current = _ball_isometry(trial, current)
        current /= np.linalg.norm(current, axis=1, keepdims=True)
    else:
        raise RuntimeError("normalisation did not converge")
    src = [stereographic("sphere_to_plane", p) for p in pts[:3]]
    dst = [stereographic("sphere_to_plane", p) for p in current[:3]]
    return moebius_from_three_points(src, dst)


def apply_to_sphere_points(moebius: MoebiusMap, points) -> np.ndarray:
    return np.array([stereographic("plane_to_sphere",
                                   moebius(stereographic("sphere_to_plane", p)))
                     for p in np.asarray(points, dtype=float)])


# layout


@dataclass
class LayoutResult:
    geometry: str
    centers: list
    vertices: list
    circles: list
    holonomy_residual: float
    frames: dict = field(default_factory=dict, repr=False)
    two_path_residual: float = 0.0
    deck_transformations: list = field(default_factory=list, repr=False)
    unreached_faces: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def point(p):
            if p is None:
                return None
            return [float(p.z1.real), float(p.z1.imag), float(p.z2.real), float(p.z2.imag)]

        return {
            "geometry": self.geometry,
            "centers": [point(p) for p in self.centers],
            "vertices": [point(p) for p in self.vertices],
            "circles": [None if c is None else c.to_list() for c in self.circles],
            "holonomy_residual": float(self.holonomy_residual),
            "two_path_residual": float(self.two_path_residual),
            "unreached_faces": list(self.unreached_faces),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def layout_from_dict(data: dict) -> LayoutResult:
    def point(v):
        return None if v is None else ProjectivePoint(complex(v[0], v[1]), complex(v[2], v[3]))

    return LayoutResult(
        geometry=data.get("geometry", "euclidean"),
        centers=[point(v) for v in data["centers"]],
        vertices=[point(v) for v in data["vertices"]],
        circles=[None if c is None else HermitianCircle.from_list(c) for c in data["circles"]],
        holonomy_residual=float(data.get("holonomy_residual", 0.0)),
        two_path_residual=float(data.get("two_path_residual", 0.0)),
        unreached_faces=list(data.get("unreached_faces", [])),
    )


class _Kinematics:
    """Generators of the development for one (problem, rho)."""

    def __init__(self, problem: PatternProblem, rho: np.ndarray):
        self.problem = problem
        self.surface = problem.surface
        self.geometry = problem.geometry
        self.model = np.exp(rho)
        self.phi = half_angles(problem, rho)
        self.translations = [translation(self.geometry, t) for t in self.model]

    def half_angle(self, e: int) -> float:
        """Half-angle at the centre of the left face of oriented edge e."""
        k = e >> 2
        side = 0 if (e & 3) in (0, 3) else 1
        return float(self.phi[2 * k + side])

    def face(self, e: int) -> int:
        return int(self.surface.face_of[e]) // 2

    def along(self, e: int) -> MoebiusMap:
        """Frame change from edge e to the next edge of its left face."""
        return rotation(2.0 * self.half_angle(e))

    def across(self, e: int) -> MoebiusMap:
        """Frame change from edge e to its reversal, seen from the neighbouring face."""
        theta = float(self.problem.theta[e >> 2])
        f, g = self.face(e), self.face(iota(e))
        return (rotation(2.0 * self.half_angle(e)) @ self.translations[f]
                @ rotation(math.pi + theta) @ self.translations[g] @ rotation(math.pi))

    def vertex_step(self, e: int) -> MoebiusMap:
        """Frame change from e to the next edge leaving the same vertex."""
        q = int(self.surface.sigma_inv[e])
        return rotation(-2.0 * self.half_angle(q)) @ self.across(q)

    def circle(self, frame: MoebiusMap, face: int) -> HermitianCircle:
        return frame.act_on_circle(_origin_circle(self.model[face]))

    def vertex_point(self, frame: MoebiusMap, face: int) -> ProjectivePoint:
        return frame(ProjectivePoint(complex(self.model[face]), 1.0))


def layout_pattern(problem: PatternProblem, rho, tolerance: float = 1e-7) -> LayoutResult:
    """Develop the pattern breadth-first from the lowest oriented edge with a face."""
    rho = np.asarray(rho, dtype=float)
    residual = float(np.max(np.abs(energy_gradient(problem, rho)))) if rho.size else 0.0
    if residual > tolerance:
        raise ValueError(f"rho is not a critical point: residual {residual:.3g} > {tolerance:.3g}")
    if problem.geometry == "hyperbolic" and np.any(rho >= 0):
        raise ValueError("hyperbolic rho must be negative")
    s = problem.surface
    kin = _Kinematics(problem, rho)
    n_oriented = 4 * s.num_edges
    has_face = [s.face_of[e] != SENTINEL for e in range(n_oriented)]
    start = next((e for e in range(n_oriented) if has_face[e]), None)
    if start is None:
        raise ValueError("surface has no faces to lay out")
    frames: dict[int, MoebiusMap] = {start: MoebiusMap.identity()}
    mismatches: list[MoebiusMap] = []
    queue = deque([start])
    while queue:
        e = queue.popleft()
        frame = frames[e]
        moves = []
        nxt = int(s.sigma[e])
        if nxt != SENTINEL:
            moves.append((nxt, frame @ kin.along(e)))
        prv = int(s.sigma_inv[e])
        if prv != SENTINEL:
            moves.append((prv, frame @ kin.along(prv).inverse()))
        rev = iota(e)
        if has_face[rev]:
            moves.append((rev, frame @ kin.across(e)))
        for target, proposed in moves:
            if target in frames:
                mismatches.append(proposed @ frames[target].inverse())
            else:
                frames[target] = proposed
                queue.append(target)

    # local cycles: faces against their cone angle, vertices against the angle sum
    local = 0.0
    for oriented_face in sorted({int(s.face_of[e]) for e in frames}):
        edges = s.face_edges(oriented_face)
        if any(s.sigma[x] == SENTINEL for x in edges):
            continue
        prod = MoebiusMap.identity()
        for x in edges:
            prod = prod @ kin.along(x)
        local = max(local, prod.distance(rotation(problem.phi[oriented_face // 2])))
    seen_vertices = set()
    for e in frames:
        v = int(s.vertex_of[e])
        if v == SENTINEL or v in seen_vertices or s.is_boundary_vertex(v // 2):
            continue
        seen_vertices.add(v)
        cycle = s.vertex_edges(v)
        if not all(has_face[x] for x in cycle):
            continue
        first = cycle[0]
        prod = MoebiusMap.identity()
        for x in cycle:
            prod = prod @ kin.vertex_step(x)
        total = float(sum(problem.theta[x >> 2] for x in cycle))
        about = kin.translations[kin.face(first)]
        expected = about @ rotation(total) @ about.inverse()
        local = max(local, min(prod.distance(expected),
                               prod.distance(about @ rotation(-total) @ about.inverse())))

    # the global mismatch only has to vanish on simply connected surfaces
    deck = [m for m in mismatches if m.distance(MoebiusMap.identity()) > 1e-8]
    two_path = max((m.distance(MoebiusMap.identity()) for m in mismatches), default=0.0)
    holonomy = local
    if is_simply_connected(s):
        holonomy = max(holonomy, two_path)
    unique_deck: list[MoebiusMap] = []
    for m in deck:
        if all(m.distance(u) > 1e-8 and m.distance(u.inverse()) > 1e-8 for u in unique_deck):
            unique_deck.append(m)

    n_faces = 2 * s.num_faces
    centers: list = [None] * n_faces
    circles: list = [None] * n_faces
    vertices: list = [None] * (2 * s.num_vertices)
    for e in sorted(frames):
        frame = frames[e]
        of = int(s.face_of[e])
        f = of // 2
        if centers[of] is None:
            centers[of] = frame(ProjectivePoint(0.0, 1.0))
            circles[of] = kin.circle(frame, f)
        ov = int(s.vertex_of[e])
        if ov != SENTINEL and vertices[ov] is None:
            vertices[ov] = kin.vertex_point(frame, f)
    reached = {of // 2 for of in range(n_faces) if centers[of] is not None}
    unreached = [f for f in range(s.num_faces) if f not in reached]
    return LayoutResult(problem.geometry, centers, vertices, circles, holonomy, frames,
                        two_path, unique_deck, unreached)


def commutator_residual(first: MoebiusMap, second: MoebiusMap) -> float:
    """Distance of the commutator of two maps from the identity."""
    comm = first @ second @ first.inverse() @ second.inverse()
    return comm.distance(MoebiusMap.identity())


# checks on a finished layout


def _to_origin(geometry: str, point: ProjectivePoint) -> MoebiusMap:
    return isometry_from_origin(geometry, point).inverse()


def angle_at(geometry: str, apex: ProjectivePoint, first: ProjectivePoint,
             second: ProjectivePoint) -> float:
    """Counterclockwise angle at ``apex`` from the geodesic to ``first`` to that to ``second``."""
    m = _to_origin(geometry, apex)
    a, b = m(first).to_complex(), m(second).to_complex()
    ang = cmath.phase(b / a)
    return ang % (2.0 * math.pi)


@dataclass
class LayoutCheck:
    intersection_angle_error: float
    kite_closure_error: float
    vertex_closure_error: float
    incidence_error: float
    radius_error: float

    @property
    def worst(self) -> float:
        return max(self.intersection_angle_error, self.kite_closure_error,
                   self.vertex_closure_error, self.incidence_error, self.radius_error)

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def check_layout(problem: PatternProblem, rho, result: LayoutResult) -> LayoutCheck:
    """Recompute angles, radii and incidences from the developed frames."""
    rho = np.asarray(rho, dtype=float)
    kin = _Kinematics(problem, rho)
    s = problem.surface
    geom = problem.geometry
    frames = result.frames
    angle_err = kite_err = vertex_err = incidence_err = radius_err = 0.0
    radii = {"euclidean": np.exp(rho)}.get(geom)
    if radii is None:
        radii = (2.0 * np.arctanh(np.exp(rho)) if geom == "hyperbolic"
                 else 2.0 * np.arctan(np.exp(rho)))
    centre_angle: dict[int, float] = {}
    vertex_angle: dict[int, float] = {}
    for e, frame in frames.items():
        f = kin.face(e)
        circ = kin.circle(frame, f)
        radius_err = max(radius_err, abs(circ.radius(geom) - radii[f]))
        centre = frame(ProjectivePoint(0.0, 1.0))
        start = kin.vertex_point(frame, f)
        nxt = int(s.sigma[e])
        incidence_err = max(incidence_err, abs(circ.form(start)))
        if s.face_of[iota(e)] != SENTINEL:
            other_frame = frame @ kin.across(e)
            g = kin.face(iota(e))
            other = kin.circle(other_frame, g)
            angle_err = max(angle_err, abs(intersection_angle(circ, other)
                                           - problem.theta[e >> 2]))
            incidence_err = max(incidence_err, abs(other.form(start)))
            if nxt != SENTINEL:
                end = kin.vertex_point(frame @ kin.along(e), f)
                centre_angle[e] = angle_at(geom, centre, start, end)
            other_centre = other_frame(ProjectivePoint(0.0, 1.0))
            # angle at the terminal vertex from centre f to centre g
            term = kin.vertex_point(frame @ kin.along(e), f)
            vertex_angle[e] = angle_at(geom, term, centre, other_centre)
    for oriented_face in sorted({int(s.face_of[e]) for e in frames}):
        edges = s.face_edges(oriented_face)
        if any(s.sigma[x] == SENTINEL for x in edges) or not all(x in centre_angle for x in edges):
            continue
        total = sum(centre_angle[x] for x in edges)
        kite_err = max(kite_err, abs(total - problem.phi[oriented_face // 2]))
    done = set()
    for e in frames:
        v = int(s.vertex_of[e])
        if v == SENTINEL or v in done or s.is_boundary_vertex(v // 2):
            continue
        done.add(v)
        cycle = s.vertex_edges(v)
        incoming = [int(s.sigma_inv[x]) for x in cycle]
        if not all(q in vertex_angle for q in incoming):
            continue
        total = sum(vertex_angle[q] for q in incoming)
        expected = float(sum(problem.theta[x >> 2] for x in cycle))
        vertex_err = max(vertex_err, abs(total - expected))
    return LayoutCheck(angle_err, kite_err, vertex_err, incidence_err, radius_err)
