"""Coherent angle systems and the network-flow solvability test."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .energy import PatternProblem, face_angle_sums, half_angles


def angles_from_rho(problem: PatternProblem, rho) -> np.ndarray:
    """Kite half-angles for every edge side."""
    return half_angles(problem, rho)


@dataclass(frozen=True)
class CoherenceReport:
    """Indices violating each condition; empty lists mean the condition holds."""

    geometry: str
    positive: list[int]
    pair: list[int]
    difference: list[int]
    face_sum: list[int]

    @property
    def ok(self) -> bool:
        return not (self.positive or self.pair or self.difference or self.face_sum)


def validate_angles(problem: PatternProblem, phi_half, tolerance: float | None = None
                    ) -> CoherenceReport:
    """Check the edge and face conditions of a coherent angle system.

    ``positive`` lists edge sides, ``pair``/``difference`` unoriented edges,
    ``face_sum`` faces.
    """
    tol = problem.tolerance if tolerance is None else tolerance
    phi_half = np.asarray(phi_half, dtype=float)
    if phi_half.shape != (2 * problem.num_edges,):
        raise ValueError("angle system needs two entries per edge")
    a, b = phi_half[0::2], phi_half[1::2]
    ts = problem.theta_star
    geom = problem.geometry
    if geom == "spherical":
        positive = np.flatnonzero((phi_half <= 0) | (phi_half >= math.pi))
        pair = np.flatnonzero((a + b <= ts) | (a + b >= math.pi + problem.theta))
        difference = np.flatnonzero(np.abs(a - b) >= ts)
    else:
        positive = np.flatnonzero(phi_half <= 0)
        difference = np.zeros(0, dtype=int)
        if geom == "euclidean":
            pair = np.flatnonzero(np.abs(a + b - ts) > tol)
        else:
            pair = np.flatnonzero(a + b >= ts)
    sums = face_angle_sums(problem, phi_half)
    face_sum = np.flatnonzero(np.abs(sums - problem.phi) > tol)
    return CoherenceReport(geom, positive.tolist(), pair.tolist(), difference.tolist(),
                           face_sum.tolist())


# max flow


class FlowNetwork:
    """Directed network with float capacities; Edmonds-Karp augmentation."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[int] = []
        self.cap: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add(self, u: int, v: int, capacity: float) -> int:
        """Add arc u->v; returns its index (the reverse arc is index ^ 1)."""
        idx = len(self.head)
        self.head += [v, u]
        self.cap += [float(capacity), 0.0]
        self.adj[u].append(idx)
        self.adj[v].append(idx + 1)
        return idx

    def max_flow(self, s: int, t: int, eps: float = 0.0) -> float:
        total = 0.0
        while True:
            pred = [-1] * self.n
            pred[s] = -2
            queue = deque([s])
            while queue and pred[t] == -1:
                u = queue.popleft()
                for a in self.adj[u]:
                    v = self.head[a]
                    if pred[v] == -1 and self.cap[a] > eps:
                        pred[v] = a
                        queue.append(v)
            if pred[t] == -1:
                return total
            push = math.inf
            v = t
            while v != s:
                a = pred[v]
                push = min(push, self.cap[a])
                v = self.head[a ^ 1]
            v = t
            while v != s:
                a = pred[v]
                self.cap[a] -= push
                self.cap[a ^ 1] += push
                v = self.head[a ^ 1]
            total += push

    def reachable(self, s: int, eps: float = 0.0) -> set[int]:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.head[a]
                if v not in seen and self.cap[a] > eps:
                    seen.add(v)
                    queue.append(v)
        return seen


@dataclass
class FeasibilityReport:
    feasible: bool
    geometry: str
    epsilon: float
    margin: float
    undetermined: bool = False
    angles: np.ndarray | None = None
    flow: dict | None = None
    witness_faces: list[int] = field(default_factory=list)
    witness_edges: list[int] = field(default_factory=list)
    phi_sum: float = 0.0
    theta_star_sum: float = 0.0
    message: str = ""

    def to_dict(self) -> dict:
        out = {
            "feasible": self.feasible,
            "geometry": self.geometry,
            "epsilon": self.epsilon,
            "margin": self.margin,
            "undetermined_strictness": self.undetermined,
            "message": self.message,
        }
        if self.feasible and self.angles is not None:
            out["angles"] = [float(v) for v in self.angles]
        else:
            out["witness"] = {
                "faces": self.witness_faces,
                "edges": self.witness_edges,
                "phi_sum": self.phi_sum,
                "two_theta_star_sum": self.theta_star_sum,
            }
        return out


def _incident_edges(problem: PatternProblem, faces) -> list[int]:
    fs = set(faces)
    return [k for k in range(problem.num_edges)
            if problem.left[k] in fs or problem.right[k] in fs]


def _solve_network(problem: PatternProblem, eps: float):
    """Max flow with every half-angle at least eps (strict pair bound when hyperbolic).

    Returns (saturated, network, arc indices, node layout, tolerance).
    """
    F, E = problem.num_faces, problem.num_edges
    src, sink = F + E, F + E + 1
    net = FlowNetwork(F + E + 2)
    sides = np.zeros(F)
    np.add.at(sides, problem.left, 1.0)
    np.add.at(sides, problem.right, 1.0)
    supply = 0.5 * problem.phi - eps * sides
    cap = problem.theta_star - 2.0 * eps
    if problem.geometry == "hyperbolic":
        cap = cap - eps
    scale = max(1.0, float(np.sum(problem.phi)))
    tol = 1e-12 * scale
    if np.any(supply < -tol) or np.any(cap < -tol):
        return False, None, None, None, tol
    src_arcs = [net.add(src, f, max(supply[f], 0.0)) for f in range(F)]
    big = float(np.sum(problem.phi)) + 1.0
    side_arcs = []
    for k in range(E):
        side_arcs.append((net.add(int(problem.left[k]), F + k, big),
                          net.add(int(problem.right[k]), F + k, big)))
    sink_arcs = [net.add(F + k, sink, max(cap[k], 0.0)) for k in range(E)]
    total = net.max_flow(src, sink, eps=1e-15 * scale)
    saturated = total >= float(np.sum(np.maximum(supply, 0.0))) - tol
    return saturated, net, (src_arcs, side_arcs, sink_arcs), (src, sink), tol


def _global_ok(problem: PatternProblem, tol: float) -> bool:
    slack = problem.angle_slack
    if problem.geometry == "euclidean":
        return abs(slack) <= tol
    return slack > tol


def feasibility(problem: PatternProblem, bisection_steps: int = 60) -> FeasibilityReport:
    """Decide whether a coherent angle system exists via a feasible flow.

    Euclidean: half-angles > 0 with phi + phi' = theta*; hyperbolic:
    half-angles > 0 with phi + phi' < theta*; both with face sums Phi/2.
    The strict inequalities are handled by maximising a common margin eps.
    """
    if problem.geometry not in ("euclidean", "hyperbolic"):
        raise ValueError("the flow criterion covers euclidean and hyperbolic problems")
    scale = max(1.0, float(np.sum(problem.phi)))
    tol = 1e-12 * scale
    sides = np.zeros(problem.num_faces)
    np.add.at(sides, problem.left, 1.0)
    np.add.at(sides, problem.right, 1.0)

    def witness(eps: float, note: str) -> FeasibilityReport:
        ok, net, _, (src, _sink), _ = _solve_network(problem, eps)
        faces: list[int] = []
        if net is not None:
            seen = net.reachable(src, eps=1e-15 * scale)
            faces = sorted(f for f in range(problem.num_faces) if f in seen)
        if not faces:
            faces = list(range(problem.num_faces))
        edges = _incident_edges(problem, faces)
        return FeasibilityReport(
            feasible=False, geometry=problem.geometry, epsilon=eps, margin=0.0,
            witness_faces=faces, witness_edges=edges,
            phi_sum=float(np.sum(problem.phi[faces])),
            theta_star_sum=float(np.sum(2.0 * problem.theta_star[edges])),
            message=note)

    if not _global_ok(problem, tol):
        kind = "equal" if problem.geometry == "euclidean" else "be strictly less than"
        return witness(0.0, f"sum of Phi must {kind} sum of 2 theta* over all edges")
    if problem.num_edges == 0:
        return witness(0.0, "no interior edges")

    ok0 = _solve_network(problem, 0.0)[0]
    if not ok0:
        return witness(0.0, "flow does not saturate the faces")
    # largest common margin
    hi = float(min(np.min(0.5 * problem.phi / np.maximum(sides, 1.0)),
                   np.min(problem.theta_star) / 3.0))
    lo = 0.0
    if _solve_network(problem, hi)[0]:
        lo = hi
    else:
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            if _solve_network(problem, mid)[0]:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-3 * lo:
                break
    threshold = 1e-11 * scale
    if lo <= threshold:
        rep = witness(max(threshold, 0.5 * (lo + hi)),
                      "strict inequality fails: margin vanishes")
        rep.undetermined = 0.0 < lo
        rep.margin = lo
        return rep
    eps = 0.5 * lo
    ok, net, (src_arcs, side_arcs, sink_arcs), _, _ = _solve_network(problem, eps)
    assert ok
    F = problem.num_faces
    angles = np.empty(2 * problem.num_edges)
    for k, (al, ar) in enumerate(side_arcs):
        # flow on an arc is the capacity accumulated on its reverse
        angles[2 * k] = eps + net.cap[al ^ 1]
        angles[2 * k + 1] = eps + net.cap[ar ^ 1]
    # rebalance self-adjacent edges so both sides are equal
    for k in range(problem.num_edges):
        if problem.left[k] == problem.right[k]:
            m = 0.5 * (angles[2 * k] + angles[2 * k + 1])
            angles[2 * k] = angles[2 * k + 1] = m
    flow = {
        "source_to_face": (0.5 * problem.phi).tolist(),
        "face_to_edge": angles.tolist(),
        "edge_to_sink": (angles[0::2] + angles[1::2]).tolist(),
    }
    return FeasibilityReport(True, problem.geometry, eps, lo, angles=angles, flow=flow,
                             message=f"feasible with every half-angle at least {eps:.3g}")


def subset_slack(problem: PatternProblem, faces) -> float:
    """sum over incident edges of 2 theta* minus sum of Phi over ``faces``."""
    faces = list(faces)
    edges = _incident_edges(problem, faces)
    return float(np.sum(2.0 * problem.theta_star[edges]) - np.sum(problem.phi[faces]))


def hole_fill_angles(t12: float, t23: float, t31: float) -> tuple[float, float, float]:
    """Angles to a filled-in hole bounded by three circles with angles t12, t23, t31."""
    t01 = math.pi - 0.5 * (t12 - t23 + t31)
    t02 = math.pi - 0.5 * (t23 - t31 + t12)
    t03 = math.pi - 0.5 * (t31 - t12 + t23)
    for v in (t01, t02, t03):
        if not 0.0 < v < math.pi:
            raise ValueError(f"filled angle {v:.6g} outside (0, pi)")
    return t01, t02, t03
