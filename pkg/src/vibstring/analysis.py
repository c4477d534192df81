"""Geometry of the boundary-parameter square and bounds for the ground state.

The zero curve ``cos a cos b - sin(a - b) = 0`` on [pi/4, pi] x [0, 3pi/4]
is where ``u = k x + c`` solves the string problem at lam = 0; there the
ground eigenvalue vanishes for every density.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .eigen import eigenfunction, eigenvalue, inner_product
from .errors import DomainError, PreconditionError, SpectralError
from .problem import BoundaryAngles, CoefficientFn, SpectralProblem

CURVE_TOL = 1e-12
QUARTER = math.pi / 4
THREE_QUARTERS = 3 * math.pi / 4


class SignClass(enum.Enum):
    ZERO = "zero"
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def sign(self) -> int:
        return {"zero": 0, "positive": 1, "negative": -1}[self.value]


@dataclass(frozen=True)
class ZeroMode:
    """The lam = 0 eigenfunction ``u(x) = k x + c``."""

    k: float
    c: float

    def residuals(self, alpha: float, beta: float) -> tuple[float, float]:
        left = self.c * math.cos(alpha) + self.k * math.sin(alpha)
        right = (self.k + self.c) * math.cos(beta) + self.k * math.sin(beta)
        return left, right

    def __call__(self, x):
        return self.k * np.asarray(x) + self.c


def curve_indicator(alpha: float, beta: float) -> float:
    return math.cos(alpha) * math.cos(beta) - math.sin(alpha - beta)


def zero_mode_determinant(alpha: float, beta: float) -> float:
    """Determinant of the lam = 0 boundary system, written out term by term."""
    return (math.cos(alpha) * math.sin(beta) + math.cos(alpha) * math.cos(beta)
            - math.sin(alpha) * math.cos(beta))


def curve_beta(alpha: float) -> float:
    """The beta in [0, 3pi/4] on the zero curve for alpha in [pi/4, pi].

    Solves ``tan b = tan a - 1`` as ``atan2(sin a - cos a, cos a)`` so the
    branch is right on both sides of alpha = pi/2.
    """
    if not QUARTER <= alpha <= math.pi:
        raise DomainError(f"alpha = {alpha!r} outside [pi/4, pi]")
    beta = math.atan2(math.sin(alpha) - math.cos(alpha), math.cos(alpha))
    return min(max(beta, 0.0), THREE_QUARTERS)


def curve_samples(count: int) -> np.ndarray:
    """``count`` points (alpha, beta) along the zero curve, alpha uniform."""
    alphas = np.linspace(QUARTER, math.pi, count)
    return np.array([(a, curve_beta(a)) for a in alphas])


def classify_lambda0(alpha: float, beta: float, tol: float = CURVE_TOL) -> SignClass:
    """Sign of the ground eigenvalue, from the boundary angles alone."""
    BoundaryAngles(alpha, beta)
    f = curve_indicator(alpha, beta)
    if abs(f) <= tol and QUARTER <= alpha <= math.pi and 0.0 <= beta <= THREE_QUARTERS:
        return SignClass.ZERO
    if f < 0.0 and QUARTER < alpha <= math.pi and 0.0 <= beta < THREE_QUARTERS:
        return SignClass.POSITIVE
    return SignClass.NEGATIVE


def zero_mode(alpha: float, beta: float) -> ZeroMode:
    """Unit (k, c) with the first nonzero component positive."""
    if classify_lambda0(alpha, beta) is not SignClass.ZERO:
        raise DomainError(f"({alpha!r}, {beta!r}) is not on the zero curve")
    m = np.array([[math.cos(alpha), math.sin(alpha)],
                  [math.cos(beta), math.sin(beta) + math.cos(beta)]])
    # columns are (c, k)
    c, k = np.linalg.svd(m)[2][-1]
    if abs(k) <= 1e-14:
        k = 0.0
    if abs(c) <= 1e-14:
        c = 0.0
    norm = math.hypot(k, c)
    k, c = k / norm, c / norm
    first = k if k != 0.0 else c
    if first < 0:
        k, c = -k, -c
    return ZeroMode(k + 0.0, c + 0.0)


class Bounds(NamedTuple):
    lower: float
    upper: float
    reference: float  # lam_0 (or mu_0) of the unit-density / zero-potential problem


def lambda0_bounds(p: CoefficientFn, alpha: float, beta: float) -> Bounds:
    """``lam0(1) min 1/p <= lam0(p) <= lam0(1) max 1/p`` (ends swap if lam0(1) < 0)."""
    unit = CoefficientFn.constant(1.0, p.interval)
    ref = eigenvalue(SpectralProblem.string(unit, alpha, beta), 0)
    pmin, pmax = p.require_positive().extremum()
    a, b = ref / pmax, ref / pmin
    return Bounds(min(a, b), max(a, b), ref)


def mu0_bounds(q: CoefficientFn, gamma: float, delta: float) -> Bounds:
    """``mu0(0) + min q <= mu0(q) <= mu0(0) + max q``."""
    zero = CoefficientFn.constant(0.0, q.interval)
    ref = eigenvalue(SpectralProblem.sturm_liouville(zero, gamma, delta), 0)
    qmin, qmax = q.extremum()
    return Bounds(ref + qmin, ref + qmax, ref)


class TraceCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float
    reference: float  # mu0(0, gamma, delta)
    sup_abs_q: float


def trace_formula_check(q: CoefficientFn, gamma: float, delta: float,
                        t_nodes: int = 32, grid_points: int = 4097) -> TraceCheck:
    """Compare mu0(q) with mu0(0) + int_0^1 (q h_t, h_t) dt.

    ``h_t`` is the unit-norm ground state of L(t q, gamma, delta); the
    t-integral uses Gauss-Legendre with ``t_nodes`` nodes.
    """
    if t_nodes < 4:
        raise PreconditionError("trace formula check needs at least 4 t-nodes")
    lhs = eigenvalue(SpectralProblem.sturm_liouville(q, gamma, delta), 0)
    zero = CoefficientFn.constant(0.0, q.interval)
    ref = eigenvalue(SpectralProblem.sturm_liouville(zero, gamma, delta), 0)
    nodes, weights = leggauss(t_nodes)
    total = 0.0
    for t, wt in zip(0.5 * (nodes + 1.0), 0.5 * weights):
        h = eigenfunction(SpectralProblem.sturm_liouville(q * t, gamma, delta), 0, grid_points)
        total += wt * inner_product(h, h, q)
    rhs = ref + total
    qmin, qmax = q.extremum()
    return TraceCheck(lhs, rhs, abs(lhs - rhs), ref, max(abs(qmin), abs(qmax)))


# -- sign map ---------------------------------------------------------------

class SignMapRow(NamedTuple):
    alpha: float
    beta: float
    cls: SignClass
    lambda0: float
    error: str = ""


def lattice(alpha_range, beta_range, n_alpha: int, n_beta: int) -> list[tuple[float, float]]:
    """Inclusive uniform lattice; every node is validated."""
    nodes = [(float(a), float(b))
             for a in np.linspace(*alpha_range, n_alpha)
             for b in np.linspace(*beta_range, n_beta)]
    for a, b in nodes:
        BoundaryAngles(a, b)
    return nodes


def open_lattice(n_alpha: int, n_beta: int) -> list[tuple[float, float]]:
    """Lattice ``alpha = pi (i+1)/n``, ``beta = pi j/n`` covering (0, pi] x [0, pi)."""
    return lattice((math.pi / n_alpha, math.pi), (0.0, math.pi * (n_beta - 1) / n_beta),
                   n_alpha, n_beta)


def _node(args) -> SignMapRow:
    p, alpha, beta = args
    cls = classify_lambda0(alpha, beta)
    try:
        lam = eigenvalue(SpectralProblem.string(p, alpha, beta), 0)
        return SignMapRow(alpha, beta, cls, lam)
    except SpectralError as exc:
        return SignMapRow(alpha, beta, cls, math.nan, str(exc))


def sign_map(nodes, p: CoefficientFn, jobs: int = 1) -> list[SignMapRow]:
    """Predicted sign class and numeric lam0(p, alpha, beta) at each node.

    Rows come back in node order whatever ``jobs`` is.
    """
    for a, b in nodes:
        BoundaryAngles(a, b)
    tasks = [(p, float(a), float(b)) for a, b in nodes]
    if jobs <= 1:
        return [_node(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_node, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))


def write_sign_map(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "beta", "class", "lambda0"])
        for r in rows:
            w.writerow([f"{r.alpha:.17g}", f"{r.beta:.17g}", r.cls.value, f"{r.lambda0:.17g}"])


def write_curve(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "beta"])
        for a, b in samples:
            w.writerow([f"{a:.17g}", f"{b:.17g}"])
