from __future__ import annotations

import math

import numpy as np
import pytest

from vibstring import ivp
from vibstring.errors import IntegrationError
from vibstring.problem import CoefficientFn, SpectralProblem, parse_coefficient

PI = math.pi


def unit(alpha=PI, beta=0.0, p="const:1"):
    return SpectralProblem.string(parse_coefficient(p), alpha, beta)


@pytest.mark.parametrize("alpha, lam, u1, du1", [
    (PI, 0.0, 1.0, 1.0),              # u = x
    (PI, PI**2, 0.0, -1.0),           # u = sin(pi x) / pi
    (PI / 2, 0.0, 1.0, 0.0),          # u = 1
])
def test_cartesian_closed_forms(alpha, lam, u1, du1):
    end = ivp.integrate_cartesian(unit(alpha), lam)
    assert end.x == 1.0
    assert end.u == pytest.approx(u1, abs=1e-9)
    assert end.du == pytest.approx(du1, abs=1e-9)


@pytest.mark.parametrize("alpha, lam, theta", [
    (PI / 2, 0.0, PI / 2),
    (PI, 0.0, PI / 4),
    (PI, PI**2, PI),
])
def test_prufer_closed_forms(alpha, lam, theta):
    assert ivp.integrate_prufer(unit(alpha), lam).theta == pytest.approx(theta, abs=1e-9)


def test_initial_data():
    assert ivp.initial_cartesian(PI) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert ivp.initial_cartesian(PI / 2) == pytest.approx((1.0, 0.0), abs=1e-15)


def random_problem(rng):
    kind = rng.integers(3)
    if kind == 0:
        p = CoefficientFn.polynomial(rng.uniform(0.5, 2.0, 1).tolist() + rng.uniform(0, 1, 2).tolist())
    elif kind == 1:
        cut = rng.uniform(0.2, 0.8)
        p = CoefficientFn((0.0, cut, 1.0), ((rng.uniform(0.5, 3),), (rng.uniform(0.5, 3),)))
    else:
        p = CoefficientFn.constant(rng.uniform(0.5, 3))
    alpha = rng.uniform(0.05, PI)
    beta = rng.uniform(0, PI - 0.05)
    return SpectralProblem.string(p, alpha, beta)


def test_prufer_matches_cartesian():
    rng = np.random.default_rng(7)
    for _ in range(50):
        prob = random_problem(rng)
        lam = rng.uniform(-50, 400)
        c = ivp.integrate_cartesian(prob, lam)
        pc = ivp.integrate_prufer(prob, lam).cartesian()
        scale = math.hypot(c.u, c.du)
        assert abs(pc.u - c.u) <= 1e-7 * scale
        assert abs(pc.du - c.du) <= 1e-7 * scale


def test_terminal_angle_increasing_in_lambda():
    rng = np.random.default_rng(11)
    for _ in range(5):
        prob = random_problem(rng)
        lams = np.linspace(-200, 2000, 60)
        theta = [ivp.terminal_angle(prob, lam) for lam in lams]
        assert np.all(np.diff(theta) > 0)


def test_prufer_angle_crosses_multiples_of_pi_upward():
    prob = unit(PI, 0.0, "poly:1,1")
    _, rows = ivp.integrate_prufer(prob, 400.0, trace=np.linspace(0, 1, 2001))
    theta = rows[:, 1]
    k = np.floor(theta / PI)
    assert np.all(np.diff(k) >= 0)
    assert k[-1] >= 3


def test_energy_conserved_for_constant_coefficients():
    lam = 37.0
    _, rows = ivp.integrate_cartesian(unit(2.0), lam, trace=np.linspace(0, 1, 101))
    energy = rows[:, 2] ** 2 + lam * rows[:, 1] ** 2
    assert np.ptp(energy) <= 1e-8 * energy[0]


def test_trace_includes_breakpoints_and_is_continuous():
    prob = unit(PI, 0.0, "pw: [0,0.5] const:1 ; [0.5,1] const:4")
    _, rows = ivp.integrate_cartesian(prob, 20.0, trace=[0.0, 0.25, 0.5, 0.75, 1.0])
    assert rows[:, 0].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    # exact two-piece solution: sin(k1 x)/k1 then matched with k2
    k1, k2 = math.sqrt(20.0), math.sqrt(80.0)
    u_h, du_h = math.sin(k1 / 2) / k1, math.cos(k1 / 2)
    u1 = u_h * math.cos(k2 / 2) + du_h / k2 * math.sin(k2 / 2)
    assert rows[-1, 1] == pytest.approx(u1, abs=1e-9)


def test_step_budget_reports_position():
    with pytest.raises(IntegrationError) as info:
        ivp.run(unit(), 1e6, ivp.CARTESIAN, (0.0, 1.0), max_steps=5)
    assert 0.0 <= info.value.x < 1.0
