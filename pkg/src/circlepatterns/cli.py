"""Command line pipeline: check, solve, layout, verify and render circle patterns.

Exit codes: 0 ok, 1 verification failed, 2 malformed input, 3 infeasible,
4 solver did not converge.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import surface as surf
from .coherent import angles_from_rho, feasibility, validate_angles
from .energy import (PatternProblem, energy_value, s_hat, vp_euclidean, vp_hyperbolic,
                     vp_spherical)
from .layout import (LayoutResult, check_layout, commutator_residual, layout_pattern,
                     normalize_moebius, stereographic)
from .solver import SolveResult, solve
from .specfun import clausen

EXIT_OK, EXIT_VERIFY, EXIT_MALFORMED, EXIT_INFEASIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3, 4
VERIFY_TOLERANCE = 1e-8


class MalformedInput(ValueError):
    pass


# defaults for the named example surfaces: geometry, theta, interior Phi
EXAMPLE_DEFAULTS = {
    "cube": ("spherical", 2 * math.pi / 3),
    "dodecahedron": ("spherical", 2 * math.pi / 3),
    "icosahedron": ("spherical", 2 * math.pi / 5),
    "tetrahedron": ("spherical", 2 * math.pi / 3),
    "projectivized_cube": ("spherical", 2 * math.pi / 3),
    "truncated_cube": ("spherical", math.pi / 2),
    "quad_torus": ("euclidean", math.pi / 2),
    "quadmesh": ("euclidean", math.pi / 2),
    "hexgrid": ("euclidean", 2 * math.pi / 3),
}


def neumann_default_phi(surface: surf.CellularSurface, theta: float) -> np.ndarray:
    """2 pi on interior faces; on boundary faces the angle covered by equal circles."""
    per_side = math.pi - theta
    phi = np.full(surface.num_faces, 2 * math.pi)
    for f in range(surface.num_faces):
        if surface.is_boundary_face(f):
            phi[f] = per_side * len(surface.face_edges(2 * f))
    return phi


@dataclass
class ProblemSpec:
    problem: PatternProblem
    seed: int | None
    rho0: np.ndarray | None


def _load_surface(value) -> surf.CellularSurface:
    if isinstance(value, str):
        try:
            return surf.named_surface(value)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
    if isinstance(value, dict) and "faces" in value:
        rows = value["faces"]
        try:
            return surf.build_from_face_boundaries(rows, name=value.get("name"))
        except (ValueError, TypeError, IndexError) as exc:
            raise MalformedInput(f"invalid face rows: {exc}") from exc
    if isinstance(value, dict) and "polygons" in value:
        try:
            return surf.from_polygons(value["polygons"], name=value.get("name"))
        except (ValueError, TypeError, IndexError) as exc:
            raise MalformedInput(f"invalid polygons: {exc}") from exc
    raise MalformedInput("surface must be an example name or an object with 'faces' rows")


_OPERATORS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
              ast.Div: operator.truediv}


def _arithmetic(text: str) -> float:
    """Evaluate numbers, pi and + - * / such as "2*pi/3"."""
    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](walk(node.left), walk(node.right))
        raise ValueError("unsupported expression")

    return walk(ast.parse(text, mode="eval"))


def _angle_value(value, what: str):
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return _arithmetic(value)
        except (ValueError, SyntaxError) as exc:
            raise MalformedInput(f"cannot parse {what} {value!r}") from exc
    if isinstance(value, list):
        return [_angle_value(v, what) for v in value]
    raise MalformedInput(f"{what} must be a number or a list of numbers")


def build_problem(data: dict, overrides: argparse.Namespace | None = None) -> ProblemSpec:
    if not isinstance(data, dict) or "surface" not in data:
        raise MalformedInput("problem file needs a 'surface' entry")
    s = _load_surface(data["surface"])
    name = data["surface"] if isinstance(data["surface"], str) else None
    default_geometry, default_theta = EXAMPLE_DEFAULTS.get(name, ("euclidean", math.pi / 2))
    over = vars(overrides) if overrides is not None else {}
    geometry = over.get("geometry") or data.get("geometry", default_geometry)
    theta = over.get("theta") if over.get("theta") is not None else data.get("theta", default_theta)
    theta = _angle_value(theta, "theta")
    phi = over.get("phi") if over.get("phi") is not None else data.get("phi")
    if phi is None:
        if not isinstance(theta, float):
            raise MalformedInput("phi is required when theta varies per edge")
        phi = neumann_default_phi(s, theta)
    else:
        phi = _angle_value(phi, "phi")
    tolerance = over.get("tolerance") if over.get("tolerance") is not None else \
        data.get("tolerance", 1e-10)
    seed = over.get("seed") if over.get("seed") is not None else data.get("seed")
    rho0 = data.get("rho0")
    try:
        problem = PatternProblem(s, geometry, theta, phi, float(tolerance))
        if rho0 is not None:
            rho0 = np.asarray(rho0, dtype=float)
            if rho0.shape != (s.num_faces,):
                raise ValueError(f"rho0 needs {s.num_faces} entries")
    except (ValueError, TypeError) as exc:
        raise MalformedInput(str(exc)) from exc
    return ProblemSpec(problem, None if seed is None else int(seed), rho0)


def read_problem(source: str, overrides: argparse.Namespace | None = None) -> ProblemSpec:
    """``source`` is a JSON file path or the name of an example surface."""
    path = Path(source)
    if path.exists():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"problem file is not valid JSON: {exc}") from exc
    elif source in surf.NAMED_SURFACES:
        data = {"surface": source}
    else:
        raise MalformedInput(f"no problem file or example named {source!r}")
    return build_problem(data, overrides)


# pipeline stages


def run_check(spec: ProblemSpec) -> tuple[dict, int]:
    p = spec.problem
    if p.geometry == "spherical":
        return ({"feasible": None, "geometry": "spherical",
                 "message": "the flow criterion applies to euclidean and hyperbolic problems"},
                EXIT_OK)
    report = feasibility(p)
    return report.to_dict(), EXIT_OK if report.feasible else EXIT_INFEASIBLE


def run_solve(spec: ProblemSpec) -> tuple[SolveResult | None, dict, int]:
    p = spec.problem
    if p.geometry != "spherical":
        report = feasibility(p)
        if not report.feasible:
            out = {"status": "infeasible_detected", "feasibility": report.to_dict()}
            return None, out, EXIT_INFEASIBLE
    result = solve(p, spec.rho0, seed=spec.seed)
    out = result.to_dict()
    if result.status == "infeasible_detected":
        return result, out, EXIT_INFEASIBLE
    if not result.converged:
        return result, out, EXIT_NONCONVERGED
    return result, out, EXIT_OK


def run_layout(spec: ProblemSpec):
    result, out, code = run_solve(spec)
    if code != EXIT_OK:
        return None, None, out, code
    layout = layout_pattern(spec.problem, result.rho)
    return result, layout, layout.to_dict(), EXIT_OK


def volume_identity_error(problem: PatternProblem, phi_half: np.ndarray) -> float:
    """Sum of per-edge prism volumes against the dual functional."""
    total = 0.0
    for k in range(problem.num_edges):
        th, a, b = float(problem.theta[k]), float(phi_half[2 * k]), float(phi_half[2 * k + 1])
        if problem.geometry == "hyperbolic":
            total += vp_hyperbolic(th, a, b)
        elif problem.geometry == "euclidean":
            total += 2.0 * vp_euclidean(th, a, b) - clausen(2.0 * (math.pi - th))
        else:
            total += 2.0 * vp_spherical(th, a, b)
    return abs(total - s_hat(problem, phi_half))


def run_verify(spec: ProblemSpec) -> tuple[dict, int]:
    result, layout, out, code = run_layout(spec)
    if code != EXIT_OK:
        return out, code
    p = spec.problem
    rho = result.rho
    phi_half = angles_from_rho(p, rho)
    coherence = validate_angles(p, phi_half, tolerance=VERIFY_TOLERANCE)
    gap = abs(s_hat(p, phi_half) - energy_value(p, rho))
    checks = check_layout(p, rho, layout)
    report = {
        "surface": surf.summary(p.surface),
        "status": result.status,
        "gradient_inf_norm": result.gradient_inf_norm,
        "duality_gap": gap,
        "coherent": coherence.ok,
        "holonomy_residual": layout.holonomy_residual,
        "volume_identity_error": volume_identity_error(p, phi_half),
        **checks.to_dict(),
    }
    d = layout.deck_transformations
    if len(d) >= 2 and p.geometry == "euclidean":
        # flat tori only; hyperbolic cone metrics have non-abelian holonomy
        report["period_commutator"] = max(commutator_residual(a, b)
                                          for i, a in enumerate(d) for b in d[i + 1:])
    elif d and p.geometry == "hyperbolic":
        report["deck_isometry"] = all(m.is_hyperbolic_isometry(tol=VERIFY_TOLERANCE) for m in d)
    failures = [k for k in ("duality_gap", "holonomy_residual", "volume_identity_error",
                            "intersection_angle_error", "kite_closure_error",
                            "vertex_closure_error", "incidence_error", "radius_error",
                            "period_commutator")
                if k in report and not report[k] <= VERIFY_TOLERANCE]
    if not coherence.ok:
        failures.append("coherent")
    if report.get("deck_isometry") is False:
        failures.append("deck_isometry")
    report["failures"] = failures
    report["passed"] = not failures
    return report, EXIT_OK if not failures else EXIT_VERIFY


# SVG rendering


def _fmt(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _clip_line(b: complex, d: float, box: float):
    """Segment of the line 2 Re(conj(b) z) + d = 0 inside [-box, box]^2."""
    nx, ny = 2.0 * b.real, 2.0 * b.imag
    pts = []
    for x in (-box, box):
        if abs(ny) > 1e-15:
            y = -(d + nx * x) / ny
            if -box <= y <= box:
                pts.append((x, y))
    for y in (-box, box):
        if abs(nx) > 1e-15:
            x = -(d + ny * y) / nx
            if -box <= x <= box:
                pts.append((x, y))
    pts = sorted(set((round(x, 12), round(y, 12)) for x, y in pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def render_svg(layout: LayoutResult, view: str = "plane", size: int = 800,
               clip: float = 4.0) -> str:
    """Deterministic SVG of the circles and vertex points of a layout.

    ``plane`` draws model coordinates; ``stereographic`` first applies the
    Möbius normalisation that centres the vertex points on the sphere.
    """
    if view not in ("plane", "stereographic"):
        raise ValueError("view must be 'plane' or 'stereographic'")
    circles = [c for c in layout.circles if c is not None]
    points = [p for p in layout.vertices if p is not None]
    if not circles:
        raise ValueError("layout has no circles to render")
    if view == "stereographic" and len(points) >= 3:
        sphere = np.array([stereographic("plane_to_sphere", p) for p in points])
        uniq = np.unique(np.round(sphere, 9), axis=0)
        if len(uniq) >= 3:
            moeb = normalize_moebius(uniq)
            circles = [moeb.act_on_circle(c) for c in circles]
            points = [moeb(p) for p in points]
    finite = [p.to_complex() for p in points if not p.is_infinite(1e-12)]
    finite = [z for z in finite if abs(z.real) <= clip and abs(z.imag) <= clip]
    spans = []
    for c in circles:
        if not c.is_line(1e-9):
            centre, radius = c.euclidean_center_radius()
            if abs(centre.real) + radius <= clip and abs(centre.imag) + radius <= clip:
                spans += [centre - radius - 1j * radius, centre + radius + 1j * radius]
    extent = finite + spans
    if extent:
        xs = [z.real for z in extent]
        ys = [z.imag for z in extent]
        lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
    else:
        lo_x = lo_y = -clip
        hi_x = hi_y = clip
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-9) * 1.05
    mid_x, mid_y = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
    scale = size / span

    def to_canvas(z: complex) -> tuple[float, float]:
        return (0.5 * size + (z.real - mid_x) * scale, 0.5 * size - (z.imag - mid_y) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<!-- view={view} geometry={layout.geometry}; canvas x = {size / 2} + "
        f"(Re z - {_fmt(mid_x)}) * {_fmt(scale)}, y = {size / 2} - (Im z - {_fmt(mid_y)}) * "
        f"{_fmt(scale)}; lines clipped to |Re z|, |Im z| <= {clip} -->",
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if layout.geometry == "hyperbolic" and view == "plane":
        cx, cy = to_canvas(0j)
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(scale)}" '
                   'fill="none" stroke="#999" stroke-dasharray="4 4"/>')
    for c in circles:
        if c.is_line(1e-9):
            m = c.matrix
            seg = _clip_line(complex(m[0, 1]), float(m[1, 1].real), clip)
            if seg is None:
                continue
            (x1, y1), (x2, y2) = (to_canvas(complex(*q)) for q in seg)
            out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                       'stroke="#1f4e9c" stroke-width="1.5"/>')
        else:
            centre, radius = c.euclidean_center_radius()
            cx, cy = to_canvas(centre)
            out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius * scale)}" '
                       'fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    for z in finite:
        cx, cy = to_canvas(z)
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.5" fill="#c0392b"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# entry point


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circlepatterns",
                                     description="Solve and lay out circle patterns.")
    parser.add_argument("command", choices=["check", "solve", "layout", "verify", "render"])
    parser.add_argument("problem", help="problem JSON file or example name (e.g. cube)")
    parser.add_argument("--geometry", choices=["euclidean", "hyperbolic", "spherical"])
    parser.add_argument("--theta", help="intersection angle, number or expression like 2*pi/3")
    parser.add_argument("--phi", help="cone angle for every face, number or expression")
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--view", choices=["plane", "stereographic"], default="plane")
    parser.add_argument("--clip", type=float, default=4.0)
    parser.add_argument("--out", help="output file (default: stdout)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = read_problem(args.problem, args)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    print(surf.summary(spec.problem.surface), file=sys.stderr)
    cmd = args.command
    if cmd == "check":
        payload, code = run_check(spec)
    elif cmd == "solve":
        _, payload, code = run_solve(spec)
    elif cmd == "layout":
        _, _, payload, code = run_layout(spec)
    elif cmd == "verify":
        payload, code = run_verify(spec)
    else:
        _, layout, payload, code = run_layout(spec)
        if code == EXIT_OK:
            try:
                _emit(render_svg(layout, args.view, clip=args.clip), args.out)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_MALFORMED
            return EXIT_OK
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    if code == EXIT_NONCONVERGED:
        print(f"solver status: {payload.get('status')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
