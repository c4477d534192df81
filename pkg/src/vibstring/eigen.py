"""Eigenvalues and eigenfunctions by Prufer-angle shooting.

The eigenvalue with index n is the unique lam where the unwrapped terminal
angle reaches ``(n + 1) pi - right``; the terminal angle is strictly
increasing in lam, so bracketing plus bisection cannot skip an eigenvalue.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from . import ivp
from .errors import LocalizationError
from .problem import CoefficientFn, SpectralProblem

LAMBDA_TOL = 1e-10
# the angle is integrated tighter than the public IVP default: local error
# accumulates over the oscillations, and lam_n must come out to LAMBDA_TOL
SHOOT_RTOL = 1e-12
SHOOT_ATOL = 1e-14
BISECT_WIDTH = 1e-6
BRACKET_BOUND = 1e12
GRID_POINTS = 4097


@dataclass(frozen=True)
class Eigenpair:
    """Eigenvalue with an eigenfunction sampled on a uniform grid.

    ``u`` is scaled to unit weighted norm; ``normalization`` is the weighted
    norm of the raw shooting solution before scaling.
    """

    n: int
    value: float
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    normalization: float

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.x, self.u, self.du])

    @property
    def sampled(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x, self.u

    def interior_zeros(self) -> int:
        u = self.u[1:-1]
        tiny = 1e-12 * np.abs(self.u).max()
        s = np.sign(np.where(np.abs(u) <= tiny, 0.0, u))
        s = s[s != 0]
        return int(np.count_nonzero(s[1:] != s[:-1]))


def characteristic(prob: SpectralProblem, lam: float, **tol) -> float:
    """``u(l) cos(right) + u'(l) sin(right)``; zero exactly at eigenvalues."""
    end = ivp.integrate_cartesian(prob, lam, **tol)
    b = prob.angles.right
    return end.u * math.cos(b) + end.du * math.sin(b)


def _means(prob: SpectralProblem) -> tuple[float, float]:
    xs = np.linspace(0.0, prob.length, 257)
    return float(prob.weight(xs).mean()), float(prob.potential(xs).mean())


def _upper_start(prob: SpectralProblem, n: int) -> float:
    wmin = prob.weight.extremum()[0]
    qmax = prob.potential.extremum()[1]
    return (((n + 1) * math.pi / prob.length) ** 2 + max(qmax, 0.0)) / wmin + 1.0


def eigenvalue(prob: SpectralProblem, n: int, *, tol: float = LAMBDA_TOL,
               bound: float = BRACKET_BOUND, rtol: float = SHOOT_RTOL,
               atol: float = SHOOT_ATOL) -> float:
    """Eigenvalue ``lam_n`` (n = 0, 1, ...) of the problem."""
    if n < 0 or int(n) != n:
        raise ValueError("eigenvalue index must be a nonnegative integer")
    beta = prob.angles.right
    wbar, qbar = _means(prob)

    def resid(lam):
        s = math.sqrt(max(1.0, lam * wbar - qbar))
        target = (n + 1) * math.pi - math.atan2(s * math.sin(beta), math.cos(beta))
        return ivp.terminal_angle(prob, lam, scale=s, rtol=rtol, atol=atol) - target

    f0 = resid(0.0)
    if f0 == 0.0:
        return 0.0
    if f0 < 0.0:
        lo, hi = 0.0, _upper_start(prob, n)
        while resid(hi) <= 0.0:
            lo, hi = hi, 2.0 * hi
            if hi > bound:
                raise LocalizationError(f"no upper bracket for n={n} below {bound:g}")
    else:
        lo, hi = -1.0, 0.0
        while resid(lo) >= 0.0:
            lo, hi = 2.0 * lo, lo
            if -lo > bound:
                raise LocalizationError(f"no lower bracket for n={n} above {-bound:g}")

    while hi - lo > BISECT_WIDTH * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    flo, fhi = resid(lo), resid(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0 or flo > 0.0 or fhi < 0.0:
        # integrator noise at the bracket ends; the bisection midpoint stands
        return 0.5 * (lo + hi)
    scale = max(1.0, abs(lo), abs(hi))
    return brentq(resid, lo, hi, xtol=tol * scale, rtol=4 * np.finfo(float).eps)


def eigenvalues(prob: SpectralProblem, count: int, **kw) -> list[float]:
    return [eigenvalue(prob, n, **kw) for n in range(count)]


def eigenfunction(prob: SpectralProblem, n: int, grid_points: int = GRID_POINTS, *,
                  value: float | None = None, rtol: float = SHOOT_RTOL,
                  atol: float = SHOOT_ATOL, **kw) -> Eigenpair:
    """Eigenpair with ``int w u^2 = 1`` on a uniform grid of ``grid_points``.

    The solution is shot from both ends and matched at the middle grid
    point, which keeps decaying modes accurate.  The sign follows the left
    initial data ``(sin left, -cos left)``.
    """
    lam = eigenvalue(prob, n, rtol=rtol, atol=atol, **kw) if value is None else float(value)
    xs = np.linspace(0.0, prob.length, grid_points)
    xs[-1] = prob.length
    im = grid_points // 2
    tol = dict(rtol=rtol, atol=atol)
    shot = _shoot(prob, lam, xs, im, tol)
    if value is None:
        lam, shot = _polish(prob, lam, xs, im, tol, shot)
    left, right = shot
    uL, dL, IL = left[-1, 1:]
    uR, dR, IR = right[0, 1:]
    s = (uL * uR + dL * dR) / (uR * uR + dR * dR)
    norm = math.sqrt(IL - s * s * IR)
    u = np.concatenate([left[:, 1], s * right[1:, 1]])
    du = np.concatenate([left[:, 2], s * right[1:, 2]])
    return Eigenpair(n, lam, xs, u / norm, du / norm, norm)


def _shoot(prob, lam, xs, im, tol):
    """Left and right Cartesian solutions (with int w u^2) meeting at xs[im]."""
    a, b = prob.angles.left, prob.angles.right
    sl, yl = ivp.run(prob, lam, ivp.CARTESIAN_NORM, (math.sin(a), -math.cos(a), 0.0),
                     points=xs[: im + 1], start=0.0, end=xs[im], **tol)
    sr, yr = ivp.run(prob, lam, ivp.CARTESIAN_NORM, (math.sin(b), -math.cos(b), 0.0),
                     points=xs[im:], start=prob.length, end=xs[im], **tol)
    return ivp._pick(sl, yl, xs[: im + 1]), ivp._pick(sr, yr, xs[im:])


def _mismatch(shot) -> float:
    """Sine of the angle between the two solutions at the match point."""
    uL, dL = shot[0][-1, 1:3]
    uR, dR = shot[1][0, 1:3]
    return (uL * dR - dL * uR) / (math.hypot(uL, dL) * math.hypot(uR, dR))


def _polish(prob, lam, xs, im, tol, shot, steps: int = 4):
    """Secant steps on the match-point mismatch so the two halves join smoothly.

    The terminal-angle root leaves a tiny slope jump at the match point that
    second differences would amplify; steps are confined to a narrow window
    around the bracketed value so the index cannot change.
    """
    window = 1e-7 * max(1.0, abs(lam))
    f0 = _mismatch(shot)
    if f0 == 0.0:
        return lam, shot
    lam1 = lam + 1e-9 * max(1.0, abs(lam))
    shot1 = _shoot(prob, lam1, xs, im, tol)
    f1 = _mismatch(shot1)
    best = (abs(f0), lam, shot)
    for _ in range(steps):
        if f1 == f0:
            break
        lam2 = lam1 - f1 * (lam1 - lam) / (f1 - f0)
        if abs(lam2 - best[1]) > window:
            break
        lam, f0 = lam1, f1
        lam1 = lam2
        shot1 = _shoot(prob, lam1, xs, im, tol)
        f1 = _mismatch(shot1)
        if abs(f1) < best[0]:
            best = (abs(f1), lam1, shot1)
        if f1 == 0.0:
            break
    return best[1], best[2]


def inner_product(f, g, weight=None) -> float:
    """``int weight f g dx`` by composite Simpson on the common sample grid.

    ``f`` and ``g`` are ``(x, values)`` pairs (an :class:`Eigenpair` is
    accepted too); ``weight`` is None, a :class:`CoefficientFn` or samples
    on the same grid.  A :class:`CoefficientFn` weight is integrated piece by
    piece with each segment's own polynomial, so jumps at breakpoints cost
    nothing; ``f g`` is interpolated linearly onto breakpoints between nodes.
    """
    xf, yf = f.sampled if isinstance(f, Eigenpair) else f
    xg, yg = g.sampled if isinstance(g, Eigenpair) else g
    xf, xg = np.asarray(xf, float), np.asarray(xg, float)
    if xf.shape != xg.shape or not np.array_equal(xf, xg):
        raise ValueError("inner_product needs both functions on the same grid")
    integrand = np.asarray(yf, float) * np.asarray(yg, float)
    if isinstance(weight, CoefficientFn):
        return _piecewise_simpson(xf, integrand, weight)
    if weight is not None:
        integrand = integrand * np.asarray(weight, float)
    return float(simpson(integrand, x=xf))


def _piecewise_simpson(x, fg, weight: CoefficientFn) -> float:
    total = 0.0
    bps = weight.breakpoints
    for (a, b), c in zip(zip(bps, bps[1:]), weight.segments):
        a, b = max(a, x[0]), min(b, x[-1])
        if b <= a:
            continue
        inner = x[(x > a) & (x < b)]
        pts = np.concatenate([[a], inner, [b]])
        vals = np.interp(pts, x, fg) * np.polynomial.polynomial.polyval(pts, c)
        total += simpson(vals, x=pts)
    return float(total)


def write_eigenpair(pair: Eigenpair, path) -> None:
    """CSV ``x,u,du`` preceded by a ``#``-prefixed JSON header line."""
    path = Path(path)
    header = {"n": pair.n, "lambda": pair.value, "normalization": pair.normalization}
    with path.open("w", newline="\n") as fh:
        fh.write("# " + json.dumps(header) + "\n")
        fh.write("x,u,du\n")
        for row in pair.samples:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_eigenpair(path) -> Eigenpair:
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0][2:])
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    return Eigenpair(header["n"], header["lambda"], data[:, 0], data[:, 1], data[:, 2],
                     header["normalization"])
