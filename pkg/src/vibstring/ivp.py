"""Initial-value integration of ``u'' = (q - lam w) u``.

Two state forms are supported:

* Cartesian ``(u, u')`` started from ``(sin left, -cos left)``;
* Prufer ``(theta, log r)`` with ``u = r sin theta``, ``u' = r cos theta``,
  started from ``theta(0) = pi - left``.  ``theta`` is never reduced mod pi,
  so ``floor(theta / pi)`` counts zeros of ``u``.

The stepper is Dormand-Prince 5(4) with local extrapolation.  Every merged
breakpoint of q and w is a mandatory stop, so coefficient jumps never fall
inside a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import IntegrationError
from .problem import SpectralProblem

RTOL = 1e-10
ATOL = 1e-12

CARTESIAN = 0
PRUFER = 1
ANGLE = 2       # theta only, used by the eigenvalue search
CARTESIAN_NORM = 3  # (u, u', int w u^2)

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@njit(cache=True)
def _horner(c, x):
    v = 0.0
    for k in range(c.shape[0] - 1, -1, -1):
        v = v * x + c[k]
    return v


@njit(cache=True)
def _rhs(mode, x, y, lam, qc, wc, scale, out):
    q = _horner(qc, x)
    w = _horner(wc, x)
    if mode == 0:
        out[0] = y[1]
        out[1] = (q - lam * w) * y[0]
    elif mode == 3:
        out[0] = y[1]
        out[1] = (q - lam * w) * y[0]
        out[2] = w * y[0] * y[0]
    else:
        s = math.sin(y[0])
        c = math.cos(y[0])
        out[0] = scale * c * c + (lam * w - q) / scale * s * s
        if mode == 1:
            out[1] = (1.0 - lam * w + q) * s * c


@njit(cache=True)
def _integrate(mode, lam, y0, stops, seg, qm, wm, rtol, atol, max_steps, scale):
    """Integrate through ``stops`` (monotone), returning the state at each.

    ``seg[i]`` is the coefficient row valid on ``[stops[i], stops[i+1]]``.
    Status 0 is success, 1 step-size underflow, 2 step budget exhausted;
    the last value returned is the last good x.
    """
    dim = y0.shape[0]
    nst = stops.shape[0]
    out = np.empty((nst, dim))
    out[0] = y0
    y = y0.copy()
    k = np.empty((7, dim))
    ytmp = np.empty(dim)
    ynew = np.empty(dim)
    span = abs(stops[nst - 1] - stops[0])
    h = 1e-2 * span / (1.0 + math.sqrt(abs(lam)))
    steps = 0
    for i in range(nst - 1):
        a = stops[i]
        b = stops[i + 1]
        if b == a:
            out[i + 1] = y
            continue
        direction = 1.0 if b > a else -1.0
        qc = qm[seg[i]]
        wc = wm[seg[i]]
        x = a
        _rhs(mode, x, y, lam, qc, wc, scale, k[0])
        while direction * (b - x) > 0.0:
            hmin = 1e-14 * max(1.0, abs(x))
            last = False
            hs = h
            if hs >= abs(b - x):
                hs = abs(b - x)
                last = True
            hd = direction * hs
            for s in range(1, 7):
                for j in range(dim):
                    acc = y[j]
                    for m in range(s):
                        acc += hd * _A[s, m] * k[m, j]
                    ytmp[j] = acc
                _rhs(mode, x + _C[s] * hd, ytmp, lam, qc, wc, scale, k[s])
            # ytmp now holds the 5th-order solution (FSAL row)
            err = 0.0
            for j in range(dim):
                ynew[j] = ytmp[j]
                e = 0.0
                for m in range(7):
                    e += _E[m] * k[m, j]
                e *= hd
                sc = atol + rtol * max(abs(y[j]), abs(ynew[j]))
                err += (e / sc) ** 2
            err = math.sqrt(err / dim)
            steps += 1
            if steps > max_steps:
                return out, 2, x
            if err <= 1.0:
                x = b if last else x + hd
                for j in range(dim):
                    y[j] = ynew[j]
                    k[0, j] = k[6, j]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not (last and fac >= 1.0):
                    h = hs * fac
            else:
                h = hs * max(0.2, 0.9 * err ** -0.2)
                if h < hmin:
                    return out, 1, x
        out[i + 1] = y
    return out, 0, stops[nst - 1]


def _plan(prob: SpectralProblem, points=None, start=0.0, end=None):
    """Stops (merged breakpoints plus requested points) between start and end."""
    bp, qm, wm = prob.mesh
    end = prob.length if end is None else end
    lo, hi = min(start, end), max(start, end)
    inner = bp[(bp > lo) & (bp < hi)]
    pts = [np.array([start, end]), inner]
    if points is not None:
        p = np.asarray(points, dtype=float)
        pts.append(p[(p >= lo) & (p <= hi)])
    stops = np.unique(np.concatenate(pts))
    if end < start:
        stops = stops[::-1].copy()
    mids = 0.5 * (stops[:-1] + stops[1:])
    seg = np.clip(np.searchsorted(bp, mids, side="right") - 1, 0, len(bp) - 2)
    return stops, seg.astype(np.int64), qm, wm


def run(prob: SpectralProblem, lam: float, mode: int, y0, *, points=None, start=0.0,
        end=None, rtol=RTOL, atol=ATOL, max_steps=10_000_000, scale=1.0):
    """Integrate from ``start`` to ``end``; return (stops, states)."""
    if not math.isfinite(lam):
        raise IntegrationError("spectral parameter must be finite", start)
    stops, seg, qm, wm = _plan(prob, points, start, end)
    out, status, xfail = _integrate(mode, float(lam), np.asarray(y0, dtype=float), stops,
                                    seg, qm, wm, rtol, atol, max_steps, float(scale))
    if status == 1:
        raise IntegrationError("step size underflow", xfail)
    if status == 2:
        raise IntegrationError("step budget exhausted", xfail)
    return stops, out


@dataclass(frozen=True)
class CartesianState:
    x: float
    u: float
    du: float


@dataclass(frozen=True)
class PruferState:
    x: float
    theta: float
    logr: float

    def cartesian(self) -> CartesianState:
        r = math.exp(self.logr)
        return CartesianState(self.x, r * math.sin(self.theta), r * math.cos(self.theta))


def initial_cartesian(angle: float) -> tuple[float, float]:
    return math.sin(angle), -math.cos(angle)


def integrate_cartesian(prob: SpectralProblem, lam: float, *, trace=None,
                        rtol=RTOL, atol=ATOL):
    """Solve from x = 0 with ``u(0) = sin(left)``, ``u'(0) = -cos(left)``.

    With ``trace`` (an array of sample points) also returns rows
    ``(x, u, u')`` at those points.
    """
    stops, out = run(prob, lam, CARTESIAN, initial_cartesian(prob.angles.left),
                     points=trace, rtol=rtol, atol=atol)
    end = CartesianState(float(stops[-1]), float(out[-1, 0]), float(out[-1, 1]))
    if trace is None:
        return end
    return end, _pick(stops, out, trace)


def integrate_prufer(prob: SpectralProblem, lam: float, *, trace=None,
                     rtol=RTOL, atol=ATOL):
    """Prufer angle and log-amplitude; ``theta(0) = pi - left``, ``log r(0) = 0``."""
    stops, out = run(prob, lam, PRUFER, (math.pi - prob.angles.left, 0.0),
                     points=trace, rtol=rtol, atol=atol)
    end = PruferState(float(stops[-1]), float(out[-1, 0]), float(out[-1, 1]))
    if trace is None:
        return end
    return end, _pick(stops, out, trace)


def terminal_angle(prob: SpectralProblem, lam: float, *, scale: float = 1.0,
                   rtol=RTOL, atol=ATOL) -> float:
    """Terminal angle of the scaled substitution ``u = r sin psi``, ``u' = S r cos psi``.

    ``scale`` S = 1 gives the plain Prufer angle.  For S > 0 the map
    theta -> psi is increasing and fixes multiples of pi/2, so zero counts
    and eigenvalue targets carry over; S close to the local frequency makes
    psi nearly linear in x.
    """
    a = prob.angles.left
    psi0 = math.atan2(scale * math.sin(a), -math.cos(a))
    _, out = run(prob, lam, ANGLE, (psi0,), rtol=rtol, atol=atol, scale=scale)
    return float(out[-1, 0])


def _pick(stops, out, points):
    points = np.asarray(points, dtype=float)
    order = np.argsort(stops, kind="stable")
    idx = order[np.searchsorted(stops[order], points)]
    return np.column_stack([points, out[idx]])
