import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrcbf.exceptions import DomainError
from rrcbf.scalar_rrbf import ScalarRrParams, analytic_solution, simulate, worst_case_roots, zdot


def test_analytic_at_equilibrium_is_constant():
    p = ScalarRrParams(1.0, 4.0)
    for t in (0.0, 0.3, 7.0):
        assert analytic_solution(p, 2.0, t) == pytest.approx(2.0, abs=1e-15)


def test_analytic_known_value():
    p = ScalarRrParams(1.0, 4.0)
    assert analytic_solution(p, 1.0, 1.0) == pytest.approx(math.sqrt(4 - 3 * math.exp(-2)), abs=1e-14)
    assert analytic_solution(p, 1.0, 1.0) == pytest.approx(1.8957832550927762, abs=1e-14)
    assert analytic_solution(p, 1.0, 60.0) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("bad", [dict(alpha=0, beta=1), dict(alpha=1, beta=-1), dict(alpha=1, beta=1, w_bar=-1)])
def test_params_domain(bad):
    with pytest.raises(DomainError):
        ScalarRrParams(**bad)


def test_analytic_rejects_nonpositive_start():
    with pytest.raises(DomainError):
        analytic_solution(ScalarRrParams(1, 1), 0.0, 1.0)


def test_roots_examples():
    r = worst_case_roots(ScalarRrParams(1, 1, 0))
    assert r.z1 == pytest.approx(1) and r.z2 == pytest.approx(1) and r.z_eq == pytest.approx(1)
    r = worst_case_roots(ScalarRrParams(1, 2, 1))
    assert abs(r.z1 - 1) <= 1e-12 and abs(r.z2 - 2) <= 1e-12
    assert worst_case_roots(ScalarRrParams(2, 8)).z_eq == pytest.approx(2)


def test_roots_large_disturbance_no_cancellation():
    p = ScalarRrParams(1.0, 1e-6, 1e6)
    z1 = worst_case_roots(p).z1
    assert abs(-p.alpha * z1**2 - p.w_bar * z1 + p.beta) <= 1e-12 * p.beta * 10


def test_zdot_examples():
    assert zdot(ScalarRrParams(1, 4), 2.0) == 0.0
    assert zdot(ScalarRrParams(1, 2, 1), 1.0, -1.0) == 0.0
    assert zdot(ScalarRrParams(1, 2, 1), 0.5, -1.0) == pytest.approx(2.5)
    with pytest.raises(DomainError):
        zdot(ScalarRrParams(1, 2), 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 10))
def test_flow_directions(alpha, beta, w_bar):
    p = ScalarRrParams(alpha, beta, w_bar)
    r = worst_case_roots(p)
    inner = np.linspace(r.z1 / 1000, r.z1, 1000)
    outer = np.linspace(r.z2, 10 * r.z2, 1000)
    for w in (-w_bar, 0.0, w_bar):
        assert all(zdot(p, z, w) >= -1e-9 * (1 + beta / z) for z in inner)
        assert all(zdot(p, z, w) <= 1e-9 * (1 + alpha * z) for z in outer)


def test_simulate_matches_analytic_on_mild_case():
    p = ScalarRrParams(1.0, 4.0)
    ts, zs = simulate(p, 1.0, 5.0, dt=1e-3)
    exact = np.array([analytic_solution(p, 1.0, t) for t in ts])
    assert np.max(np.abs(zs - exact)) <= 1e-10


def test_simulate_is_fourth_order():
    p = ScalarRrParams(1.0, 4.0)
    errs = []
    for dt in (2e-3, 1e-3):
        ts, zs = simulate(p, 0.1, 2.0, dt=dt)
        errs.append(np.max(np.abs(zs - [analytic_solution(p, 0.1, t) for t in ts])))
    assert 12 < errs[0] / errs[1] < 20


def test_simulate_stays_bounded_under_disturbance():
    p = ScalarRrParams(1.0, 2.0, 1.0)
    r = worst_case_roots(p)
    _, zs = simulate(p, 5.0, 20.0, disturbance=lambda t: math.sin(3 * t))
    assert zs.min() > 0
    assert zs[-5000:].max() <= r.z2 + 1e-6 and zs[-5000:].min() >= r.z1 - 1e-6
