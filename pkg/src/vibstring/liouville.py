"""Liouville transformation of S(p, alpha, beta) into L(q, gamma, delta).

With ``c = int_0^1 sqrt(p)`` and ``s(x) = (pi / c) int_0^x sqrt(p)`` the
string problem ``-u'' = lam p u`` on [0, 1] becomes ``-y'' + q(s) y = mu y`` on
[0, pi], ``y = p^(1/4) u`` up to a constant, ``mu = (c / pi)^2 lam`` and::

    q = (c / pi)^2 (p'' / (4 p^2) - 5 p'^2 / (16 p^3))

which is ``p^(-1/4) d^2/ds^2 p^(1/4)`` with the s-derivatives taken through
``ds/dx = (pi / c) sqrt(p)``.  Substituting ``u = p^(-1/4) y`` into the
boundary condition at an end point gives::

    cot(gamma) = (c / pi) (cot(alpha) - p'(0) / (4 p(0))) / sqrt(p(0))

and the same at x = 1 for (beta, delta); alpha = pi maps to gamma = pi and
beta = 0 to delta = 0.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .eigen import eigenvalue
from .errors import PreconditionError
from .problem import CoefficientFn, SpectralProblem

GRID_POINTS = 2049
C2_TOL = 1e-10


@dataclass(frozen=True)
class LiouvilleImage:
    c: float
    x: np.ndarray
    s: np.ndarray
    q: np.ndarray
    gamma: float
    delta: float
    potential: CoefficientFn  # C2 cubic spline through (s, q) on [0, pi]

    def problem(self) -> SpectralProblem:
        return SpectralProblem.sturm_liouville(self.potential, self.gamma, self.delta)


def check_c2(p: CoefficientFn, tol: float = C2_TOL) -> None:
    """Values and first two derivatives must agree across every breakpoint."""
    derivs = [p, p.derivative(1), p.derivative(2)]
    for i, x in enumerate(p.breakpoints[1:-1]):
        for order, d in enumerate(derivs):
            left = np.polynomial.polynomial.polyval(x, d.segments[i])
            right = np.polynomial.polynomial.polyval(x, d.segments[i + 1])
            if abs(left - right) > tol * max(1.0, abs(left), abs(right)):
                raise PreconditionError(
                    f"density is not C2: derivative {order} jumps at x = {x!r} "
                    f"({left!r} vs {right!r})")


def _cot_angle(cot: float) -> float:
    """Angle in (0, pi) with the given cotangent."""
    return math.pi / 2 - math.atan(cot)


def map_angle(angle: float, p0: float, dp0: float, c: float) -> float:
    """Sturm-Liouville angle for a string angle in (0, pi)."""
    cot = (c / math.pi) * (1.0 / math.tan(angle) - dp0 / (4.0 * p0)) / math.sqrt(p0)
    return _cot_angle(cot)


def map_angle_as_printed(angle: float, p0: float, dp0: float, c: float) -> float:
    """The alternative reading ``cot a = (c/pi)(cot g / sqrt p + p' / (4 p^1.5))``.

    Solved for g.  Kept only so the tests can show that it breaks the
    eigenvalue relation once p is not constant.
    """
    cot = (math.pi / c / math.tan(angle) - dp0 / (4.0 * p0 ** 1.5)) * math.sqrt(p0)
    return _cot_angle(cot)


def _cumulative_sqrt(p: CoefficientFn, x: np.ndarray, order: int = 10) -> np.ndarray:
    """``int_0^x sqrt(p)`` at the grid points, Gauss-Legendre per cell."""
    t, w = leggauss(order)
    a, b = x[:-1], x[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * t[None, :]
    cells = (np.sqrt(p(nodes)) * w[None, :]).sum(axis=1) * half
    return np.concatenate([[0.0], np.cumsum(cells)])


def transform(p: CoefficientFn, alpha: float, beta: float,
              grid_points: int = GRID_POINTS) -> LiouvilleImage:
    p.require_positive()
    check_c2(p)
    a, b = p.interval
    bps = list(p.breakpoints[1:-1])
    c = quad(lambda t: math.sqrt(p(t)), a, b, epsabs=0.0, epsrel=1e-12, limit=200,
             points=bps or None)[0]
    x = np.linspace(a, b, grid_points)
    x = np.unique(np.concatenate([x, bps]))
    cum = _cumulative_sqrt(p, x)
    s = math.pi * cum / cum[-1]
    s[-1] = math.pi
    d1, d2 = p.derivative(1), p.derivative(2)
    pv, d1v, d2v = p(x), d1(x), d2(x)
    q = (c / math.pi) ** 2 * (d2v / (4 * pv**2) - 5 * d1v**2 / (16 * pv**3))

    gamma = math.pi if alpha == math.pi else map_angle(alpha, p.eval(a), d1.eval(a), c)
    delta = 0.0 if beta == 0.0 else map_angle(beta, p.eval(b), d1.eval(b), c)
    potential = CoefficientFn.from_samples(s, q, "cubic")
    return LiouvilleImage(c, x, s, q, gamma, delta, potential)


class ConsistencyRow(NamedTuple):
    n: int
    direct: float
    transformed: float
    rel_gap: float


def consistency_check(p: CoefficientFn, alpha: float, beta: float, n_max: int = 5,
                      grid_points: int = GRID_POINTS) -> list[ConsistencyRow]:
    """``lam_n(p)`` against ``(pi / c)^2 mu_n(q)`` for n = 0..n_max.

    The gap is relative to ``max(|lam_n|, 1)`` so zero modes compare absolutely.
    """
    img = transform(p, alpha, beta, grid_points)
    direct = SpectralProblem.string(p, alpha, beta)
    sl = img.problem()
    rows = []
    for n in range(n_max + 1):
        lam = eigenvalue(direct, n)
        mapped = (math.pi / img.c) ** 2 * eigenvalue(sl, n)
        rows.append(ConsistencyRow(n, lam, mapped, abs(lam - mapped) / max(abs(lam), 1.0)))
    return rows


def write_image(img: LiouvilleImage, path) -> None:
    """CSV ``x,s,q`` with a ``#``-prefixed JSON header (c, gamma, delta)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps({"c": img.c, "gamma": img.gamma, "delta": img.delta}) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "s", "q"])
        for row in zip(img.x, img.s, img.q):
            w.writerow([f"{v:.17g}" for v in row])
