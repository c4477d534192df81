from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from vibstring import ivp
from vibstring.eigen import (
    Eigenpair,
    characteristic,
    eigenfunction,
    eigenvalue,
    eigenvalues,
    inner_product,
    read_eigenpair,
    write_eigenpair,
)
from vibstring.problem import CoefficientFn, SpectralProblem, parse_coefficient

PI = math.pi


def string(p="const:1", alpha=PI, beta=0.0):
    return SpectralProblem.string(parse_coefficient(p), alpha, beta)


def neumann_sl(q="const:0"):
    return SpectralProblem.sturm_liouville(parse_coefficient(q, (0.0, PI)), PI / 2, PI / 2)


@pytest.mark.parametrize("alpha, beta, lam, expected", [
    (PI, 0.0, PI**2, 0.0),
    (PI, 0.0, 0.0, 1.0),
    (PI / 2, PI / 2, 0.0, 0.0),
])
def test_characteristic_examples(alpha, beta, lam, expected):
    assert characteristic(string(alpha=alpha, beta=beta), lam) == pytest.approx(expected, abs=1e-9)


def test_characteristic_vanishes_at_eigenvalues():
    prob = string("poly:1,1", 2.0, 1.0)
    for n in range(4):
        lam = eigenvalue(prob, n)
        end = ivp.integrate_cartesian(prob, lam, rtol=1e-12, atol=1e-14)
        assert abs(characteristic(prob, lam)) <= 1e-7 * math.hypot(end.u, end.du)


def test_anchor_values():
    assert eigenvalue(string(), 0) == pytest.approx(PI**2, rel=1e-10)
    assert eigenvalue(string("poly:1,1"), 0) == pytest.approx(6.548, abs=1e-3)
    assert eigenvalue(string("poly:1,0,1"), 0) == pytest.approx(7.643, abs=1e-3)


def test_dirichlet_string_spectrum():
    vals = eigenvalues(string(), 21)
    exact = PI**2 * np.arange(1, 22) ** 2
    assert np.max(np.abs(np.array(vals) / exact - 1)) <= 1e-8


def test_neumann_sturm_liouville_spectrum():
    vals = eigenvalues(neumann_sl(), 11)
    assert np.max(np.abs(np.array(vals) - np.arange(11) ** 2)) <= 1e-8


def test_robin_closed_form():
    # u = sin(k x) + k cos(k x) style: alpha with cot alpha = -1 at left, Dirichlet right.
    # u(0) sin... characteristic: tan(k) = -k for left angle 3pi/4 (u' = u at 0)
    prob = string(alpha=3 * PI / 4)
    lam = eigenvalue(prob, 0)
    k = math.sqrt(lam)
    assert math.tan(k) + k == pytest.approx(0.0, abs=1e-8)
    assert PI / 2 < k < PI


def test_negative_ground_state_far_out():
    prob = string(alpha=0.05, beta=3.1)
    lam0, lam1 = eigenvalue(prob, 0), eigenvalue(prob, 1)
    assert lam0 < lam1 < 0
    pair = eigenfunction(prob, 0)
    assert pair.interior_zeros() == 0


def random_problem(rng):
    if rng.random() < 0.5:
        p = CoefficientFn.polynomial([rng.uniform(0.5, 2), rng.uniform(0, 1), rng.uniform(0, 1)])
    else:
        cut = rng.uniform(0.2, 0.8)
        p = CoefficientFn((0.0, cut, 1.0), ((rng.uniform(0.5, 3),), (rng.uniform(0.5, 3), 0.5)))
    return SpectralProblem.string(p, rng.uniform(0.1, PI), rng.uniform(0, PI - 0.1))


def test_eigenvalues_strictly_increase():
    rng = np.random.default_rng(3)
    for _ in range(6):
        vals = eigenvalues(random_problem(rng), 11)
        assert np.all(np.diff(vals) > 0)


def test_eigenfunction_dirichlet_sine():
    pair = eigenfunction(string(), 0, 2001)
    assert np.max(np.abs(pair.u - math.sqrt(2) * np.sin(PI * pair.x))) <= 1e-8


def test_eigenfunction_neumann_constant():
    pair = eigenfunction(string(alpha=PI / 2, beta=PI / 2), 0, 513)
    assert pair.value == pytest.approx(0.0, abs=1e-10)
    assert np.max(np.abs(pair.u - 1.0)) <= 1e-8


def test_eigenfunction_zero_count_matches_dense_trace():
    prob = string("poly:1,1")
    pair = eigenfunction(prob, 1)
    assert pair.interior_zeros() == 1
    _, rows = ivp.integrate_cartesian(prob, pair.value, trace=np.linspace(0, 1, 20001))
    u = rows[1:-1, 1]
    assert np.count_nonzero(np.sign(u[1:]) != np.sign(u[:-1])) == 1


def test_zero_counts_on_random_problems():
    rng = np.random.default_rng(5)
    for _ in range(4):
        prob = random_problem(rng)
        for n in range(5):
            assert eigenfunction(prob, n).interior_zeros() == n


def test_orthogonality_and_normalization():
    rng = np.random.default_rng(9)
    for _ in range(3):
        prob = random_problem(rng)
        pairs = [eigenfunction(prob, n) for n in range(6)]
        for i, a in enumerate(pairs):
            assert inner_product(a, a, prob.weight) == pytest.approx(1.0, abs=1e-7)
            for b in pairs[:i]:
                assert abs(inner_product(a, b, prob.weight)) <= 1e-7


def test_residual_and_boundary_conditions():
    rng = np.random.default_rng(13)
    for _ in range(4):
        prob = random_problem(rng)
        bp = np.array(prob.weight.breakpoints)
        a, b = prob.angles.left, prob.angles.right
        for n in range(4):
            pair = eigenfunction(prob, n, 4097)
            x, u, h = pair.x, pair.u, pair.x[1] - pair.x[0]
            d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
            xi = x[1:-1]
            # skip stencils straddling a density jump
            clean = np.all(np.abs(xi[:, None] - bp[None, 1:-1]) > 1.5 * h, axis=1) \
                if len(bp) > 2 else np.ones(len(xi), bool)
            res = d2 + (pair.value * prob.weight(xi) - prob.potential(xi)) * u[1:-1]
            assert np.max(np.abs(res[clean])) <= 1e-5 * (1 + abs(pair.value)) * np.abs(u).max()
            assert abs(u[0] * math.cos(a) + pair.du[0] * math.sin(a)) <= 1e-8
            assert abs(u[-1] * math.cos(b) + pair.du[-1] * math.sin(b)) <= 1e-8


def test_sign_follows_initial_data():
    pair = eigenfunction(string(), 2)
    assert pair.du[0] > 0          # u'(0) = -cos(pi) = 1 before scaling
    pair = eigenfunction(string(alpha=PI / 2, beta=PI / 2), 1)
    assert pair.u[0] > 0


def test_inner_product_examples():
    x = np.linspace(0, 1, 4097)
    s = np.sin(PI * x)
    assert inner_product((x, s), (x, s)) == pytest.approx(0.5, abs=1e-12)
    one = np.ones_like(x)
    assert inner_product((x, one), (x, one), parse_coefficient("poly:1,1")) == pytest.approx(1.5, abs=1e-14)
    oracle = quad(lambda t: math.sin(PI * t) ** 2 / (1 + t), 0, 1, epsabs=1e-14, epsrel=1e-14)[0]
    got = inner_product((x, s), (x, s), 1 / (1 + x))
    assert got == pytest.approx(oracle, abs=1e-10)


def test_inner_product_grid_mismatch():
    x = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        inner_product((x, x), (x[:-1], x[:-1]))


def test_eigenpair_file_round_trip(tmp_path):
    pair = eigenfunction(string("poly:1,1"), 1, 129)
    path = tmp_path / "pair.csv"
    write_eigenpair(pair, path)
    back = read_eigenpair(path)
    assert isinstance(back, Eigenpair)
    assert back.value == pair.value and back.n == 1
    assert np.array_equal(back.u, pair.u) and np.array_equal(back.x, pair.x)
