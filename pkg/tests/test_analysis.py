from __future__ import annotations

import math

import numpy as np
import pytest

from vibstring import analysis
from vibstring.analysis import SignClass
from vibstring.eigen import eigenvalue
from vibstring.errors import DomainError, PreconditionError
from vibstring.problem import CoefficientFn, SpectralProblem, parse_coefficient

PI = math.pi
SL = (0.0, PI)


@pytest.mark.parametrize("alpha, beta, value", [
    (PI / 2, PI / 2, 0.0),
    (PI / 4, 0.0, 0.0),
    (3 * PI / 4, PI / 4, -1.5),
])
def test_curve_indicator(alpha, beta, value):
    assert analysis.curve_indicator(alpha, beta) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("alpha, beta", [(PI / 4, 0.0), (PI / 2, PI / 2), (PI, 3 * PI / 4)])
def test_curve_beta(alpha, beta):
    assert analysis.curve_beta(alpha) == pytest.approx(beta, abs=1e-15)


def test_curve_beta_domain():
    with pytest.raises(DomainError):
        analysis.curve_beta(0.5)


def test_curve_samples_on_curve():
    pts = analysis.curve_samples(50)
    assert pts.shape == (50, 2)
    assert max(abs(analysis.curve_indicator(a, b)) for a, b in pts) <= 1e-12
    assert np.all(np.diff(pts[:, 1]) > 0)


@pytest.mark.parametrize("alpha, beta, cls", [
    (PI / 2, PI / 2, SignClass.ZERO),
    (3 * PI / 4, PI / 4, SignClass.POSITIVE),
    (0.1, 0.0, SignClass.NEGATIVE),
    (PI, 0.0, SignClass.POSITIVE),
    (0.1, 3.0, SignClass.NEGATIVE),
])
def test_classify_examples(alpha, beta, cls):
    assert analysis.classify_lambda0(alpha, beta) is cls


def test_classify_rejects_bad_angles():
    with pytest.raises(DomainError):
        analysis.classify_lambda0(0.0, 0.0)


@pytest.mark.parametrize("alpha, beta, k, c", [
    (PI / 2, PI / 2, 0.0, 1.0),
    (PI, 3 * PI / 4, 1.0, 0.0),
    (PI / 4, 0.0, 1 / math.sqrt(2), -1 / math.sqrt(2)),
])
def test_zero_mode_examples(alpha, beta, k, c):
    mode = analysis.zero_mode(alpha, beta)
    assert mode.k == pytest.approx(k, abs=1e-14)
    assert mode.c == pytest.approx(c, abs=1e-14)


def test_zero_mode_off_curve():
    with pytest.raises(DomainError):
        analysis.zero_mode(PI, 0.0)


def test_zero_mode_solves_problem_on_curve():
    for a, b in analysis.curve_samples(50):
        mode = analysis.zero_mode(a, b)
        assert max(map(abs, mode.residuals(a, b))) <= 1e-12
        assert abs(analysis.zero_mode_determinant(a, b)) <= 1e-12
        assert math.hypot(mode.k, mode.c) == pytest.approx(1.0)


def test_lambda0_bounds_examples():
    for r in (1, 2, 5):
        b = analysis.lambda0_bounds(CoefficientFn.polynomial([1.0] + [0.0] * (r - 1) + [1.0]), PI, 0.0)
        assert b.lower == pytest.approx(PI**2 / 2, rel=1e-10)
        assert b.upper == pytest.approx(PI**2, rel=1e-10)
    p = parse_coefficient("poly:1,1")
    b = analysis.lambda0_bounds(p, PI, 0.0)
    assert b.lower < eigenvalue(SpectralProblem.string(p, PI, 0.0), 0) < b.upper


def test_lambda0_bounds_unit_density_collapse():
    b = analysis.lambda0_bounds(CoefficientFn.constant(1.0), 2.0, 1.0)
    assert b.lower == b.upper == b.reference


def test_lambda0_bounds_swap_when_negative():
    p = parse_coefficient("poly:1,1")
    b = analysis.lambda0_bounds(p, 0.3, 2.8)
    assert b.reference < 0 and b.lower < b.upper
    assert b.lower == pytest.approx(b.reference, rel=1e-12)
    lam = eigenvalue(SpectralProblem.string(p, 0.3, 2.8), 0)
    assert b.lower <= lam <= b.upper


def test_mu0_bounds_examples():
    b = analysis.mu0_bounds(CoefficientFn.constant(0.0, SL), PI / 2, PI / 2)
    assert b.lower == b.upper == pytest.approx(0.0, abs=1e-10)
    b = analysis.mu0_bounds(CoefficientFn.constant(2.5, SL), 1.0, 2.0)
    mu = eigenvalue(SpectralProblem.sturm_liouville(CoefficientFn.constant(2.5, SL), 1.0, 2.0), 0)
    assert b.lower == b.upper == pytest.approx(mu, abs=1e-8)
    q = CoefficientFn.polynomial([0.0, PI, -1.0], SL)       # x (pi - x)
    b = analysis.mu0_bounds(q, PI, 0.0)
    assert b.lower == pytest.approx(1.0, abs=1e-9)
    assert b.upper == pytest.approx(1.0 + PI**2 / 4, abs=1e-9)
    mu = eigenvalue(SpectralProblem.sturm_liouville(q, PI, 0.0), 0)
    assert b.lower < mu < b.upper


def test_trace_formula_examples():
    zero = analysis.trace_formula_check(CoefficientFn.constant(0.0, SL), 1.0, 2.0, t_nodes=8)
    assert zero.gap == 0.0
    const = analysis.trace_formula_check(CoefficientFn.constant(1.5, SL), PI, 0.0, t_nodes=8)
    assert const.rhs == pytest.approx(const.reference + 1.5, abs=1e-9)
    q = CoefficientFn.polynomial([0.0, PI / 10, -0.1], SL)
    t = analysis.trace_formula_check(q, PI, 0.0, t_nodes=32)
    assert t.gap <= 1e-6
    assert abs(t.lhs - t.reference) <= t.sup_abs_q


def test_trace_formula_needs_nodes():
    with pytest.raises(PreconditionError):
        analysis.trace_formula_check(CoefficientFn.constant(0.0, SL), PI, 0.0, t_nodes=2)


def test_sign_map_small_lattice():
    nodes = analysis.lattice((PI / 2, PI), (0.0, PI / 2), 3, 3)
    assert (PI / 2, PI / 2) in nodes
    rows = analysis.sign_map(nodes, CoefficientFn.constant(1.0))
    assert [(r.alpha, r.beta) for r in rows] == nodes
    neumann = rows[nodes.index((PI / 2, PI / 2))]
    assert neumann.cls is SignClass.ZERO and abs(neumann.lambda0) <= 1e-8
    (row,) = analysis.sign_map([(3 * PI / 4, PI / 4)], CoefficientFn.constant(1.0))
    assert row.cls is SignClass.POSITIVE and row.lambda0 > 0
    (row,) = analysis.sign_map([(0.1, 3.0)], CoefficientFn.constant(1.0))
    assert row.cls is SignClass.NEGATIVE and row.lambda0 < 0


def test_sign_map_jobs_preserve_order():
    nodes = analysis.open_lattice(5, 5)
    p = parse_coefficient("pw: [0,0.3] const:2 ; [0.3,1] poly:1,1")
    serial = analysis.sign_map(nodes, p, jobs=1)
    parallel = analysis.sign_map(nodes, p, jobs=2)
    assert serial == parallel


def test_lattice_rejects_alpha_zero():
    with pytest.raises(DomainError):
        analysis.lattice((0.0, PI), (0.0, 1.0), 3, 3)


def test_open_lattice_shape():
    nodes = analysis.open_lattice(21, 21)
    assert len(nodes) == 441
    assert min(a for a, _ in nodes) > 0 and max(b for _, b in nodes) < PI


def test_writers_are_byte_stable(tmp_path):
    rows = analysis.sign_map(analysis.open_lattice(3, 3), CoefficientFn.constant(1.0))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    analysis.write_sign_map(rows, a)
    analysis.write_sign_map(rows, b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "alpha,beta,class,lambda0" and len(lines) == 10
    analysis.write_curve(analysis.curve_samples(4), a)
    assert a.read_text().splitlines()[1] == "0.78539816339744828,0"
