"""Special functions: Chebyshev series, Clausen's integral, Im Li2 on rays, f_theta."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ChebSeries:
    """Chebyshev series on [a, b], stored with the halved-constant convention.

    The represented function is sum_k c_k T_k(y) - c_0/2 with y mapped from
    [a, b] to [-1, 1].
    """

    coefficients: tuple[float, ...]
    interval: tuple[float, float]

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise ValueError("empty Chebyshev series")
        a, b = self.interval
        if not b > a:
            raise ValueError("interval must satisfy a < b")

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=float)

    def __call__(self, x):
        return cheb_eval(self, x)


def cheb_fit(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
             n: int = 32, threshold: float = 1e-16) -> ChebSeries:
    """Interpolate ``func`` at the n Chebyshev nodes of [a, b].

    Trailing coefficients whose magnitude is below ``threshold`` are dropped.
    """
    if n < 1:
        raise ValueError("fit degree must be at least 1")
    k = np.arange(n)
    nodes = np.cos(math.pi * (k + 0.5) / n)
    bma, bpa = 0.5 * (b - a), 0.5 * (b + a)
    samples = np.asarray(func(nodes * bma + bpa), dtype=float)
    j = k[:, None]
    c = (2.0 / n) * (np.cos(math.pi * j * (k[None, :] + 0.5) / n) @ samples)
    last = n
    while last > 1 and abs(c[last - 1]) < threshold:
        last -= 1
    return ChebSeries(tuple(float(v) for v in c[:last]), (float(a), float(b)))


def cheb_eval(series: ChebSeries, x):
    """Clenshaw evaluation; raises if any point lies outside the interval."""
    a, b = series.interval
    xa = np.asarray(x, dtype=float)
    slack = 1e-12 * (b - a)
    if np.any(xa < a - slack) or np.any(xa > b + slack):
        raise ValueError("evaluation point outside the Chebyshev interval")
    c = series.coeffs
    y = (2.0 * xa - a - b) / (b - a)
    y2 = 2.0 * y
    d = np.zeros_like(y)
    dd = np.zeros_like(y)
    for cj in c[:0:-1]:
        d, dd = y2 * d - dd + cj, d
    out = y * d - dd + 0.5 * c[0]
    return float(out) if np.ndim(x) == 0 else out


def cheb_integrate(series: ChebSeries) -> ChebSeries:
    """Antiderivative series, normalised to vanish at the left endpoint."""
    c = series.coeffs
    n = len(c)
    a, b = series.interval
    con = 0.25 * (b - a)
    if n == 1:
        # constant c0/2 integrates to (c0/2)(x - a) = con*c0*(y + 1)
        return ChebSeries((2.0 * con * c[0], con * c[0]), series.interval)
    ext = np.concatenate([c, [0.0]])
    cint = np.zeros(n + 1)
    total, fac = 0.0, 1.0
    for j in range(1, n + 1):
        cint[j] = con * (ext[j - 1] - (ext[j + 1] if j + 1 <= n else 0.0)) / j
        total += fac * cint[j]
        fac = -fac
    cint[0] = 2.0 * total
    return ChebSeries(tuple(float(v) for v in cint), series.interval)


def _h(x: np.ndarray) -> np.ndarray:
    """-log(2 sin(x/2) / x), even and analytic on [-pi, pi]."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    # series: sin(x/2)/(x/2) = 1 - x^2/24 + x^4/1920
    out[small] = xs**2 / 24.0 + xs**4 / 2880.0
    xl = x[~small]
    out[~small] = -np.log(2.0 * np.sin(0.5 * xl) / xl)
    return out


H_SERIES = cheb_fit(_h, -math.pi, math.pi, n=32)
_H_INTEGRAL = cheb_integrate(H_SERIES)
_H_INTEGRAL_AT_ZERO = cheb_eval(_H_INTEGRAL, 0.0)


def clausen(x):
    """Clausen's integral Cl(x) = -int_0^x log|2 sin(t/2)| dt."""
    xa = np.asarray(x, dtype=float)
    y = xa - TWO_PI * np.round(xa / TWO_PI)
    sign = np.sign(y)
    u = np.abs(y)
    u = np.minimum(u, math.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlog = np.where(u > 0.0, u * (np.log(np.where(u > 0, u, 1.0)) - 1.0), 0.0)
    val = cheb_eval(_H_INTEGRAL, u) - _H_INTEGRAL_AT_ZERO - xlog
    out = sign * val
    return float(out) if np.ndim(x) == 0 else out


CATALAN = clausen(0.5 * math.pi)


def _check_theta(theta) -> None:
    t = np.asarray(theta, dtype=float)
    if np.any(~(t > 0.0)) or np.any(~(t < math.pi)):
        raise ValueError("intersection angle must lie in (0, pi)")


def f_theta(theta, x):
    """f_theta(x) = arg(1 - e^(x - i theta)) on the (0, pi - theta) branch."""
    _check_theta(theta)
    xa = np.asarray(x, dtype=float)
    t = np.asarray(theta, dtype=float)
    s, c = np.sin(t), np.cos(t)
    pos = xa > 0.0
    with np.errstate(over="ignore"):
        ex_neg = np.exp(np.where(pos, 0.0, xa))
        ex_pos = np.exp(-np.where(pos, xa, 0.0))
    low = np.arctan2(ex_neg * s, 1.0 - ex_neg * c)
    high = np.arctan2(s, ex_pos - c)
    out = np.where(pos, high, low)
    return float(out) if np.ndim(out) == 0 else out


def f_theta_derivative(theta, x):
    """sin(theta) / (2 (cosh x - cos theta))."""
    _check_theta(theta)
    xa = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.sin(theta) / (2.0 * (np.cosh(xa) - np.cos(theta)))
    return float(out) if np.ndim(out) == 0 else out


def f_theta_inverse(theta, y):
    """log(sin y / sin(y + theta)) for y in (0, pi - theta)."""
    _check_theta(theta)
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya > 0.0)) or np.any(~(ya < math.pi - np.asarray(theta))):
        raise ValueError("argument outside (0, pi - theta)")
    out = np.log(np.sin(ya) / np.sin(ya + theta))
    return float(out) if np.ndim(out) == 0 else out


def im_li(x, theta):
    """Im Li2(e^(x + i theta)) via Clausen's integral."""
    _check_theta(theta)
    y = np.asarray(f_theta(theta, x))
    xa = np.asarray(x, dtype=float)
    out = (y * xa + 0.5 * clausen(2.0 * y) - 0.5 * clausen(2.0 * y + 2.0 * theta)
           + 0.5 * clausen(2.0 * theta))
    return float(out) if np.ndim(out) == 0 else out


def im_li_symmetric(x, theta):
    """Im Li2(e^(x+i theta)) + Im Li2(e^(-x+i theta)) in closed form.

    With theta* = pi - theta and tan(p/2) = tanh(x/2) tan(theta*/2) the sum
    equals p x + Cl(p + theta*) + Cl(theta* - p) - Cl(2 theta*).
    """
    _check_theta(theta)
    star = math.pi - np.asarray(theta, dtype=float)
    xa = np.asarray(x, dtype=float)
    p = 2.0 * np.arctan(np.tanh(0.5 * xa) * np.tan(0.5 * star))
    out = p * xa + clausen(p + star) + clausen(star - p) - clausen(2.0 * star)
    return float(out) if np.ndim(out) == 0 else out
