"""Minimisation of the circle pattern functionals by nonlinear conjugate gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .energy import (BracketError, PatternProblem, energy_gradient, energy_value,
                     optimal_shift)

STATUSES = ("converged", "infeasible_detected", "max_iter", "inner_bracket_failure")
UNBOUNDED_RHO = 50.0


@dataclass
class SolveResult:
    rho: np.ndarray
    value: float
    gradient_inf_norm: float
    iterations: int
    status: str
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "rho": [float(v) for v in self.rho],
            "value": float(self.value),
            "gradient_inf_norm": float(self.gradient_inf_norm),
            "iterations": int(self.iterations),
            "message": self.message,
        }


class _LineSearchFailure(RuntimeError):
    pass


def _cubic_min(a, fa, da, b, fb, db):
    """Minimiser of the cubic interpolating (f, f') at a and b, or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def strong_wolfe(phi: Callable[[float], tuple[float, float]], f0: float, d0: float,
                 alpha0: float = 1.0, c1: float = 1e-4, c2: float = 0.1,
                 max_steps: int = 40) -> tuple[float, float, float]:
    """Bracketing and zoom search for a step satisfying the strong Wolfe conditions.

    ``phi(alpha)`` returns (value, directional derivative).  Returns
    (alpha, value, derivative); raises _LineSearchFailure.
    """
    if not d0 < 0:
        raise _LineSearchFailure("not a descent direction")

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        for _ in range(max_steps):
            a = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            span = hi - lo
            if a is None or not (min(lo, hi) + 0.1 * abs(span) <= a <= max(lo, hi) - 0.1 * abs(span)):
                a = lo + 0.5 * span
            fa, da = phi(a)
            if fa > f0 + c1 * a * d0 or fa >= f_lo:
                hi, f_hi, d_hi = a, fa, da
            else:
                if abs(da) <= -c2 * d0:
                    return a, fa, da
                if da * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = a, fa, da
            if abs(hi - lo) <= 1e-16 * max(1.0, abs(lo)):
                break
        if f_lo < f0:
            return lo, f_lo, d_lo
        raise _LineSearchFailure("zoom did not terminate")

    prev, f_prev, d_prev = 0.0, f0, d0
    a = alpha0
    for i in range(max_steps):
        fa, da = phi(a)
        if not math.isfinite(fa):
            a = 0.5 * (prev + a)
            continue
        if fa > f0 + c1 * a * d0 or (i > 0 and fa >= f_prev):
            return zoom(prev, f_prev, d_prev, a, fa, da)
        if abs(da) <= -c2 * d0:
            return a, fa, da
        if da >= 0:
            return zoom(a, fa, da, prev, f_prev, d_prev)
        prev, f_prev, d_prev = a, fa, da
        a *= 2.0
    raise _LineSearchFailure("no bracket found")


def derivative_search(phi: Callable[[float], tuple[float, float]], f0: float, d0: float,
                      alpha0: float, c2: float = 0.1, noise: float = 0.0,
                      max_steps: int = 80) -> tuple[float, float, float]:
    """Step to a near-zero of the directional derivative.

    Used when value differences drown in rounding: the curvature condition is
    enforced exactly, the sufficient decrease condition only up to ``noise``.
    """
    if not d0 < 0:
        raise _LineSearchFailure("not a descent direction")
    lo, d_lo = 0.0, d0
    hi = alpha0
    for _ in range(max_steps):
        f_hi, d_hi = phi(hi)
        if math.isfinite(f_hi) and d_hi >= 0:
            break
        if not math.isfinite(f_hi):
            hi *= 0.5
            continue
        lo, d_lo = hi, d_hi
        hi *= 2.0
    else:
        raise _LineSearchFailure("derivative never changes sign")
    for _ in range(max_steps):
        # secant guess safeguarded towards the bracket interior
        a = lo - d_lo * (hi - lo) / (d_hi - d_lo) if d_hi != d_lo else 0.5 * (lo + hi)
        if not (lo + 0.01 * (hi - lo) <= a <= hi - 0.01 * (hi - lo)):
            a = 0.5 * (lo + hi)
        fa, da = phi(a)
        if abs(da) <= -c2 * d0:
            if fa <= f0 + noise:
                return a, fa, da
            break
        if da < 0:
            lo, d_lo = a, da
        else:
            hi, d_hi = a, da
    raise _LineSearchFailure("derivative search failed")


def conjugate_gradient(fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
                       x0: np.ndarray, tol: float, max_iter: int, restart: int,
                       project: Callable[[np.ndarray], np.ndarray] | None = None,
                       c1: float = 1e-4, c2: float = 0.1):
    """Polak-Ribiere CG with strong Wolfe steps and periodic restarts.

    Returns (x, value, gradient, iterations, status, message).
    """
    proj = project if project is not None else (lambda v: v)
    x = proj(np.array(x0, dtype=float))
    f, g = fun(x)
    g = proj(g)
    p = -g
    last_alpha = 1.0 / max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
    since_restart = 0
    for it in range(max_iter):
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm <= tol:
            return x, f, g, it, "converged", ""
        if float(np.max(np.abs(x))) > UNBOUNDED_RHO:
            return x, f, g, it, "max_iter", (
                "iterates left the box |rho| <= 50: the functional appears unbounded below")
        d0 = float(g @ p)
        if not d0 < 0:
            p, d0 = -g, -float(g @ g)

        def phi(alpha, p=p):
            fv, gv = fun(x + alpha * p)
            return fv, float(proj(gv) @ p)

        noise = 1e-13 * max(1.0, abs(f))
        try:
            alpha, f_new, _ = strong_wolfe(phi, f, d0, last_alpha, c1, c2)
        except _LineSearchFailure:
            try:
                alpha, f_new, _ = derivative_search(phi, f, d0, last_alpha, c2, noise)
            except _LineSearchFailure:
                if since_restart:
                    p, since_restart = -g, 0
                    continue
                return x, f, g, it, "max_iter", "line search failed along steepest descent"
        x_new = proj(x + alpha * p)
        f_new, g_new = fun(x_new)
        g_new = proj(g_new)
        if f_new > f + noise:
            return x, f, g, it, "max_iter", "line search would increase the objective"
        since_restart += 1
        if since_restart >= restart:
            beta, since_restart = 0.0, 0
        else:
            beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        p = -g_new + beta * p
        last_alpha = alpha
        x, f, g = x_new, f_new, g_new
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    status = "converged" if gnorm <= tol else "max_iter"
    return x, f, g, max_iter, status, "" if status == "converged" else "iteration limit reached"


def _project_u(v: np.ndarray) -> np.ndarray:
    return v - np.mean(v)


def minimize(problem: PatternProblem, rho0, max_iter: int = 10_000) -> SolveResult:
    """Minimise the euclidean or hyperbolic functional starting from rho0."""
    if problem.geometry not in ("euclidean", "hyperbolic"):
        raise ValueError("minimize handles euclidean and hyperbolic problems")
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (problem.num_faces,):
        raise ValueError(f"rho0 needs {problem.num_faces} entries")
    euclid = problem.geometry == "euclidean"
    if euclid and not problem.scale_invariant:
        grad = energy_gradient(problem, rho0)
        return SolveResult(rho0.copy(), energy_value(problem, rho0),
                           float(np.max(np.abs(grad))), 0, "infeasible_detected",
                           f"sum Phi - sum 2 theta* = {-problem.angle_slack:.3g} is not zero")
    if not euclid and problem.angle_slack <= 1e-12 * max(1.0, float(np.sum(problem.phi))):
        # at equality the gradient only decays as rho -> -infinity
        grad = energy_gradient(problem, rho0)
        return SolveResult(rho0.copy(), energy_value(problem, rho0),
                           float(np.max(np.abs(grad))), 0, "infeasible_detected",
                           "sum Phi must be strictly less than sum 2 theta*")

    def fun(r):
        return energy_value(problem, r), energy_gradient(problem, r)

    x, f, g, it, status, msg = conjugate_gradient(
        fun, rho0, problem.tolerance, max_iter, max(problem.num_faces, 1),
        _project_u if euclid else None)
    return SolveResult(x, f, float(np.max(np.abs(g))) if g.size else 0.0, it, status, msg)


def solve_spherical(problem: PatternProblem, rho0, max_iter: int = 10_000) -> SolveResult:
    """Minimise the reduced spherical functional over the gauge subspace.

    The returned rho includes the inner shift t*, so it is a critical point of
    the spherical functional itself.
    """
    if problem.geometry != "spherical":
        raise ValueError("solve_spherical needs a spherical problem")
    if not problem.is_closed:
        raise ValueError("spherical solving needs a closed surface")
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (problem.num_faces,):
        raise ValueError(f"rho0 needs {problem.num_faces} entries")

    def fun(r):
        t = optimal_shift(problem, r)
        shifted = r + t
        return energy_value(problem, shifted), energy_gradient(problem, shifted)

    try:
        x, f, g, it, status, msg = conjugate_gradient(
            fun, rho0, problem.tolerance, max_iter, max(problem.num_faces, 1), _project_u)
        t = optimal_shift(problem, x)
    except BracketError as exc:
        return SolveResult(rho0.copy(), math.nan, math.inf, 0, "inner_bracket_failure", str(exc))
    rho = x + t
    grad = energy_gradient(problem, rho)
    gnorm = float(np.max(np.abs(grad)))
    if status == "converged" and gnorm > problem.tolerance:
        status, msg = "max_iter", "residual after the inner shift exceeds tolerance"
    return SolveResult(rho, energy_value(problem, rho), gnorm, it, status, msg)


def solve(problem: PatternProblem, rho0=None, seed: int | None = None,
          max_iter: int = 10_000) -> SolveResult:
    """Dispatch on geometry; rho0 defaults to zeros (or -1 for hyperbolic)."""
    if rho0 is None:
        if seed is not None:
            rng = np.random.default_rng(seed)
            rho0 = rng.uniform(-1.0, 1.0, problem.num_faces)
            if problem.geometry == "hyperbolic":
                rho0 = rho0 - 2.0
        else:
            fill = -1.0 if problem.geometry == "hyperbolic" else 0.0
            rho0 = np.full(problem.num_faces, fill)
    if problem.geometry == "spherical":
        return solve_spherical(problem, rho0, max_iter)
    return minimize(problem, rho0, max_iter)
