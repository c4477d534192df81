"""Coefficient functions, boundary angles and spectral problems.

A coefficient (density p, potential q or weight w) is a piecewise polynomial
on a closed interval. Segment polynomials are stored with ascending
coefficients in the *global* variable x, which is also how the text grammar
writes them::

    const:1
    poly:1,0,1                      # 1 + x**2
    pw: [0,0.5] poly:1 ; [0.5,1] poly:2

Values at interior breakpoints are taken from the right segment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, ParseError

POSITIVITY_FLOOR = 1e-12


def _as_coeffs(c: Sequence[float]) -> tuple[float, ...]:
    out = tuple(float(v) for v in c)
    if not out:
        raise DomainError("polynomial needs at least one coefficient")
    if not all(math.isfinite(v) for v in out):
        raise DomainError("polynomial coefficients must be finite")
    return out


@dataclass(frozen=True)
class CoefficientFn:
    """Piecewise polynomial on ``[breakpoints[0], breakpoints[-1]]``."""

    breakpoints: tuple[float, ...]
    segments: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        segs = tuple(_as_coeffs(s) for s in self.segments)
        if len(bp) < 2:
            raise DomainError("need at least two breakpoints")
        if len(segs) != len(bp) - 1:
            raise DomainError(
                f"{len(bp)} breakpoints need {len(bp) - 1} segments, got {len(segs)}")
        if any(not b > a for a, b in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "segments", segs)

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, interval=(0.0, 1.0)) -> "CoefficientFn":
        return cls(tuple(interval), ((value,),))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], interval=(0.0, 1.0)) -> "CoefficientFn":
        return cls(tuple(interval), (tuple(coeffs),))

    @classmethod
    def from_samples(cls, x, y, kind: str = "cubic") -> "CoefficientFn":
        """Interpolate samples by a piecewise cubic.

        ``kind`` is ``"cubic"`` (not-a-knot spline, C2) or ``"pchip"``
        (shape preserving, stays inside the sample range).
        """
        from scipy.interpolate import CubicSpline, PchipInterpolator

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if kind == "cubic":
            pp = CubicSpline(x, y)
        elif kind == "pchip":
            pp = PchipInterpolator(x, y)
        else:
            raise ValueError(f"unknown interpolation kind {kind!r}")
        # local form a3 t^3 + a2 t^2 + a1 t + a0 with t = x - xi
        a3, a2, a1, a0 = pp.c
        xi = x[:-1]
        c0 = a0 - a1 * xi + a2 * xi**2 - a3 * xi**3
        c1 = a1 - 2 * a2 * xi + 3 * a3 * xi**2
        c2 = a2 - 3 * a3 * xi
        segs = tuple(zip(c0, c1, c2, a3))
        return cls(tuple(x), segs)

    # -- basic properties -------------------------------------------------

    @property
    def interval(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        return max(len(s) for s in self.segments) - 1

    @cached_property
    def _bp(self) -> np.ndarray:
        a = np.array(self.breakpoints)
        a.flags.writeable = False
        return a

    @cached_property
    def coeff_matrix(self) -> np.ndarray:
        """Segment coefficients zero-padded to shape (n_segments, degree + 1)."""
        m = np.zeros((len(self.segments), self.degree + 1))
        for i, s in enumerate(self.segments):
            m[i, : len(s)] = s
        m.flags.writeable = False
        return m

    def segment_index(self, x) -> np.ndarray:
        idx = np.searchsorted(self._bp, x, side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def __call__(self, x):
        """Vectorised evaluation without the domain check."""
        x = np.asarray(x, dtype=float)
        idx = self.segment_index(x)
        c = self.coeff_matrix[idx]
        out = np.zeros_like(x)
        for k in range(c.shape[-1] - 1, -1, -1):
            out = out * x + c[..., k]
        return out

    def eval(self, x: float) -> float:
        a, b = self.interval
        if not a <= x <= b:
            raise DomainError(f"x = {x!r} outside [{a!r}, {b!r}]")
        return float(self(x))

    # -- calculus and algebra --------------------------------------------

    def derivative(self, m: int = 1) -> "CoefficientFn":
        return CoefficientFn(self.breakpoints,
                             tuple(tuple(P.polyder(s, m)) if len(s) > m else (0.0,)
                                   for s in self.segments))

    def refine(self, points) -> "CoefficientFn":
        """Same function with extra breakpoints inserted."""
        a, b = self.interval
        pts = np.unique(np.concatenate([self._bp, np.asarray(points, float)]))
        pts = pts[(pts >= a) & (pts <= b)]
        mids = 0.5 * (pts[:-1] + pts[1:])
        idx = self.segment_index(mids)
        return CoefficientFn(tuple(pts), tuple(self.segments[i] for i in idx))

    def _combine(self, other, op) -> "CoefficientFn":
        if not isinstance(other, CoefficientFn):
            other = CoefficientFn.constant(float(other), self.interval)
        if not np.allclose(self.interval, other.interval, rtol=0, atol=1e-12):
            raise DomainError("coefficients live on different intervals")
        f, g = self.refine(other.breakpoints), other.refine(self.breakpoints)
        segs = tuple(tuple(op(np.asarray(s), np.asarray(t)))
                     for s, t in zip(f.segments, g.segments))
        return CoefficientFn(f.breakpoints, segs)

    def __add__(self, other):
        return self._combine(other, P.polyadd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, P.polysub)

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, factor: float) -> "CoefficientFn":
        return CoefficientFn(self.breakpoints,
                             tuple(tuple(factor * c for c in s) for s in self.segments))

    def __mul__(self, other):
        if isinstance(other, CoefficientFn):
            return self._combine(other, P.polymul)
        return self.scale(float(other))

    __rmul__ = __mul__

    # -- extrema ------------------------------------------------------------

    def segment_extrema(self) -> list[tuple[float, float]]:
        """(min, max) of every segment over its closed subinterval."""
        out = []
        for (a, b), c in zip(zip(self.breakpoints, self.breakpoints[1:]), self.segments):
            cand = [a, b]
            if len(c) > 2:
                cand.extend(_real_roots(P.polyder(c), a, b))
            vals = P.polyval(np.array(cand), c)
            out.append((float(vals.min()), float(vals.max())))
        return out

    def extremum(self) -> tuple[float, float]:
        ext = self.segment_extrema()
        return min(e[0] for e in ext), max(e[1] for e in ext)

    def require_positive(self, floor: float = POSITIVITY_FLOOR, name: str = "density"):
        for i, (lo, _) in enumerate(self.segment_extrema()):
            if not lo >= floor:
                a, b = self.breakpoints[i], self.breakpoints[i + 1]
                raise DomainError(
                    f"{name} not bounded away from 0 on segment {i} [{a!r}, {b!r}]: "
                    f"min = {lo!r} < {floor!r}")
        return self

    def is_constant(self) -> bool:
        lo, hi = self.extremum()
        return lo == hi


def _real_roots(c, a: float, b: float) -> list[float]:
    """Real roots of an ascending-coefficient polynomial strictly inside (a, b).

    Coefficients below 1e-14 of the largest are dropped first; they move
    values by far less than rounding on any bounded interval and would
    otherwise blow up the companion matrix.
    """
    c = np.asarray(c, dtype=float)
    big = np.max(np.abs(c)) if c.size else 0.0
    if big == 0.0:
        return []
    c = P.polytrim(np.where(np.abs(c) < 1e-14 * big, 0.0, c), tol=0.0)
    if len(c) < 2:
        return []
    return [r.real for r in P.polyroots(c)
            if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real)) and a < r.real < b]


def extremum(f: CoefficientFn) -> tuple[float, float]:
    """Exact global (min, max) of a piecewise polynomial."""
    return f.extremum()


def evaluate(f: CoefficientFn, x: float) -> float:
    return f.eval(x)


class Ratio(NamedTuple):
    x: np.ndarray
    values: np.ndarray
    min: float
    max: float


def ratio(fa: CoefficientFn, fb: CoefficientFn, grid=4097) -> Ratio:
    """Sample ``fa / fb`` on ``grid`` and return its exact range.

    On each merged segment the interior extrema of ``f / g`` sit at real
    roots of ``f' g - f g'``, so the range comes from those roots and the
    segment end points.
    """
    fb.require_positive(name="denominator")
    a, b = fb.interval
    if isinstance(grid, (int, np.integer)):
        xs = np.linspace(a, b, int(grid))
    else:
        xs = np.asarray(grid, dtype=float)
    values = fa(xs) / fb(xs)

    f, g = fa.refine(fb.breakpoints), fb.refine(fa.breakpoints)
    lo, hi = math.inf, -math.inf
    for (x0, x1), cf, cg in zip(zip(f.breakpoints, f.breakpoints[1:]), f.segments, g.segments):
        cand = [x0, x1]
        num = P.polysub(P.polymul(P.polyder(cf), cg), P.polymul(cf, P.polyder(cg)))
        cand.extend(_real_roots(num, x0, x1))
        cand = np.array(cand)
        vals = P.polyval(cand, cf) / P.polyval(cand, cg)
        lo, hi = min(lo, vals.min()), max(hi, vals.max())
    return Ratio(xs, values, float(lo), float(hi))


@dataclass(frozen=True)
class BoundaryAngles:
    """Separated boundary conditions ``u cos(angle) + u' sin(angle) = 0``.

    ``left`` lies in (0, pi], ``right`` in [0, pi).
    """

    left: float
    right: float

    def __post_init__(self):
        left, right = float(self.left), float(self.right)
        if not 0.0 < left <= math.pi:
            raise DomainError(f"left angle {left!r} not in (0, pi]")
        if not 0.0 <= right < math.pi:
            raise DomainError(f"right angle {right!r} not in [0, pi)")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)


@dataclass(frozen=True)
class SpectralProblem:
    """``-u'' + q u = lam w u`` on ``[0, length]`` with separated conditions.

    The string problem S(p, alpha, beta) has q = 0, w = p, length 1; the
    Sturm-Liouville problem L(q, gamma, delta) has w = 1 and length pi.
    """

    potential: CoefficientFn
    weight: CoefficientFn
    length: float
    angles: BoundaryAngles

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("interval length must be positive")
        for name, f in (("potential", self.potential), ("weight", self.weight)):
            a, b = f.interval
            if abs(a) > 1e-12 or abs(b - self.length) > 1e-12 * max(1.0, self.length):
                raise DomainError(f"{name} lives on [{a}, {b}], expected [0, {self.length}]")
        self.weight.require_positive(name="weight")

    @classmethod
    def string(cls, p: CoefficientFn, alpha: float, beta: float) -> "SpectralProblem":
        return cls(CoefficientFn.constant(0.0, p.interval), p, p.interval[1],
                   BoundaryAngles(alpha, beta))

    @classmethod
    def sturm_liouville(cls, q: CoefficientFn, gamma: float, delta: float) -> "SpectralProblem":
        return cls(q, CoefficientFn.constant(1.0, q.interval), q.interval[1],
                   BoundaryAngles(gamma, delta))

    def with_angles(self, left: float, right: float) -> "SpectralProblem":
        return SpectralProblem(self.potential, self.weight, self.length,
                               BoundaryAngles(left, right))

    @cached_property
    def mesh(self):
        """Merged breakpoints and per-segment (q, w) coefficient rows."""
        bp = np.unique(np.concatenate([self.potential._bp, self.weight._bp]))
        bp[0], bp[-1] = 0.0, self.length
        mids = 0.5 * (bp[:-1] + bp[1:])
        qm = np.ascontiguousarray(self.potential.coeff_matrix[self.potential.segment_index(mids)])
        wm = np.ascontiguousarray(self.weight.coeff_matrix[self.weight.segment_index(mids)])
        return bp, qm, wm


# -- text grammar -------------------------------------------------------------

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos=None) -> int:
        return len(self.text[: self.pos if pos is None else pos].encode())

    def fail(self, message: str, pos=None):
        raise ParseError(message, self.offset(pos))

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, literal: str) -> bool:
        self.skip()
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str):
        if not self.peek(literal):
            self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def number(self) -> float:
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.fail("expected a number")
        self.pos = m.end()
        value = float(m.group())
        if not math.isfinite(value):
            self.fail("number out of range", m.start())
        return value

    def coeffs(self) -> tuple[float, ...]:
        if self.peek("const"):
            self.expect("const")
            self.expect(":")
            return (self.number(),)
        if self.peek("poly"):
            self.expect("poly")
            self.expect(":")
            out = [self.number()]
            while self.peek(","):
                self.expect(",")
                out.append(self.number())
            return tuple(out)
        self.fail("expected 'const:' or 'poly:'")

    def end(self):
        self.skip()
        if self.pos != len(self.text):
            self.fail("unexpected trailing input")


def parse_coefficient(text: str, interval=(0.0, 1.0), *, positive: bool = False,
                      floor: float = POSITIVITY_FLOOR, name: str = "density") -> CoefficientFn:
    """Parse the coefficient grammar into a :class:`CoefficientFn`.

    With ``positive=True`` the result must stay above ``floor`` (densities
    and weights).
    """
    a, b = float(interval[0]), float(interval[1])
    ps = _Parser(text)
    if ps.peek("pw"):
        ps.expect("pw")
        ps.expect(":")
        bps, segs = [], []
        while True:
            start = ps.pos
            ps.expect("[")
            lo = ps.number()
            ps.expect(",")
            hi = ps.number()
            ps.expect("]")
            expected = bps[-1] if bps else a
            if abs(lo - expected) > 1e-12 * max(1.0, abs(expected)):
                ps.fail(f"piece starts at {lo!r}, expected {expected!r}", start)
            if not hi > lo:
                ps.fail("empty piece", start)
            if not bps:
                bps.append(a)
            bps.append(hi)
            segs.append(ps.coeffs())
            if not ps.peek(";"):
                break
            ps.expect(";")
        ps.end()
        if abs(bps[-1] - b) > 1e-12 * max(1.0, abs(b)):
            ps.fail(f"pieces end at {bps[-1]!r}, interval ends at {b!r}")
        bps[-1] = b
        f = CoefficientFn(tuple(bps), tuple(segs))
    else:
        c = ps.coeffs()
        ps.end()
        f = CoefficientFn((a, b), (c,))
    if positive:
        f.require_positive(floor, name=name)
    return f


def _fmt(v: float) -> str:
    return repr(float(v))


def format_coefficient(f: CoefficientFn) -> str:
    """Inverse of :func:`parse_coefficient` (floats written with ``repr``)."""

    def seg(c):
        if len(c) == 1:
            return "const:" + _fmt(c[0])
        return "poly:" + ",".join(_fmt(v) for v in c)

    if len(f.segments) == 1:
        return seg(f.segments[0])
    pieces = [f"[{_fmt(a)},{_fmt(b)}] {seg(c)}"
              for a, b, c in zip(f.breakpoints, f.breakpoints[1:], f.segments)]
    return "pw: " + " ; ".join(pieces)


_ANGLE = re.compile(r"^\s*(?:(?P<k>[+-]?[\d.]+(?:[eE][+-]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(?P<m>[\d.]+))?\s*$")


def parse_angle(text) -> float:
    """Radians as a float, or a multiple of pi such as ``3pi/4`` or ``pi/2``."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    try:
        return float(s)
    except ValueError:
        pass
    m = _ANGLE.match(s)
    if not m:
        raise DomainError(f"cannot read angle {text!r}")
    k = float(m.group("k")) if m.group("k") else 1.0
    d = float(m.group("m")) if m.group("m") else 1.0
    return k * math.pi / d
