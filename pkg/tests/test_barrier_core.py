import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrcbf.barrier_core import (ClassKFn, SafeFunctionSpec, gradient_check, max_regularisation,
                                reciprocal_floor, rrbf_residual, solve_crossing)
from rrcbf.exceptions import DomainError, SingularityError

class_k = st.one_of(
    st.floats(0.05, 20).map(ClassKFn.linear),
    st.tuples(st.floats(0.05, 20), st.floats(0.3, 3)).map(lambda gp: ClassKFn.power(*gp)),
    st.lists(st.floats(0.05, 5), min_size=2, max_size=5).map(
        lambda slopes: ClassKFn.table([(0, 0)] + [(i + 1.0, float(np.sum(slopes[:i + 1]))) for i in range(len(slopes))])),
)


def test_linear_crossing_is_sqrt_two():
    cp = solve_crossing(ClassKFn.linear(1), ClassKFn.linear(2))
    assert abs(cp.h_s - math.sqrt(2)) <= 1e-9
    assert abs(cp.residual) <= 1e-10


def test_crossing_with_offset_and_sigma():
    # s + 1 = 2/(s + 0.5)  ->  s^2 + 1.5 s - 1.5 = 0
    cp = solve_crossing(ClassKFn.linear(1), ClassKFn.linear(2), offset=1.0, sigma=0.5)
    assert cp.h_s == pytest.approx((-1.5 + math.sqrt(2.25 + 6)) / 2, abs=1e-12)


def test_crossing_rejects_sigma_at_limit():
    with pytest.raises(DomainError):
        solve_crossing(ClassKFn.linear(1), ClassKFn.linear(2), offset=3.0, sigma=2 / 3)


@settings(max_examples=100, deadline=None)
@given(class_k, class_k)
def test_crossing_residual(alpha, beta):
    cp = solve_crossing(alpha, beta)
    assert cp.h_s > 0
    assert abs(alpha(cp.h_s) - beta(1 / cp.h_s)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(class_k, st.floats(-50, 50))
def test_inverse_roundtrip(fn, s):
    assert fn.inverse(fn(s)) == pytest.approx(s, abs=1e-9 * (1 + abs(s)))


@settings(max_examples=50, deadline=None)
@given(class_k, st.floats(0.01, 5))
def test_derivative_matches_difference(fn, s):
    eps = 1e-6
    if fn.kind == "table" and any(abs(s - k[0]) < 2 * eps for k in fn.knots):
        return
    fd = (fn(s + eps) - fn(s - eps)) / (2 * eps)
    assert fn.derivatives(s, 1)[1] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_power_second_derivative():
    fn = ClassKFn.power(2.0, 3.0)
    assert fn.derivatives(-1.5, 3) == pytest.approx([-6.75, 13.5, -18.0, 12.0])


@pytest.mark.parametrize("text", ["linear 2", "power 1.5 0.5", "table 0 0 1 2 3 3"])
def test_describe_parse_roundtrip(text):
    fn = ClassKFn.parse(text)
    assert ClassKFn.parse(fn.describe()) == fn


def test_parse_bare_number():
    assert ClassKFn.parse("3") == ClassKFn.linear(3)


@pytest.mark.parametrize("text", ["", "linear", "linear -1", "cubic 1", "table 0 0 1", "table 1 1 2 2"])
def test_parse_rejects(text):
    with pytest.raises(DomainError):
        ClassKFn.parse(text)


def test_table_must_be_monotone():
    with pytest.raises(DomainError):
        ClassKFn.table([(0, 0), (1, 1), (2, 0.5)])


def _linear_spec():
    return SafeFunctionSpec(h=lambda x: x[0] - x[1], grad_h=lambda x: np.array([1.0, -1.0]))


def test_gradient_check():
    assert gradient_check(_linear_spec(), [0.3, -2.0]) < 1e-8
    bad = SafeFunctionSpec(h=lambda x: x[0] ** 2, grad_h=lambda x: np.array([x[0]]))
    assert gradient_check(bad, [1.0]) > 0.1


def test_rrbf_residual_and_pole():
    spec = _linear_spec()
    drift = lambda x: np.array([-x[1], 0.0])
    # L_f h = -x2; at (2, 0): 0 + 2 - 2/2 = 1
    assert rrbf_residual(spec, drift, [2.0, 0.0], ClassKFn.linear(1), ClassKFn.linear(2)) == pytest.approx(1.0)
    with pytest.raises(SingularityError):
        rrbf_residual(spec, drift, [1.0, 1.0], ClassKFn.linear(1), ClassKFn.linear(2))
    assert rrbf_residual(spec, drift, [1.0, 1.0], ClassKFn.linear(1), ClassKFn.linear(2), sigma=0.5) == pytest.approx(-5.0)


def test_regularisation_bounds():
    beta = ClassKFn.linear(2)
    assert max_regularisation(beta, 3.0) == pytest.approx(2 / 3)
    sigma = 0.5 * max_regularisation(beta, 3.0)
    assert reciprocal_floor(beta, sigma, 3.0) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        reciprocal_floor(beta, 0.0, 3.0)
