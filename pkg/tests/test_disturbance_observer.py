import math

import numpy as np
import pytest

from rrcbf.config import ObserverConfig, ScenarioConfig
from rrcbf.disturbance_observer import init_observer, observer_step
from rrcbf.exceptions import DomainError
from rrcbf.plants import AccBenchmark, DisturbanceSignal, LinearBenchmark
from rrcbf.sim_engine import max_estimation_error, run_scenario

LIN = LinearBenchmark()


def _observer_run(dist, horizon, gain=10.0, d_hat0=0.0, plant=LIN, x0=(1.0, 0.0)):
    cfg = ScenarioConfig("obs", plant, None, dist, x0, horizon=horizon,
                         observer=ObserverConfig(True, gain, d_hat0))
    return run_scenario(cfg)


def test_zero_disturbance_keeps_zero_estimate():
    tr = _observer_run(DisturbanceSignal(), 5.0)
    assert np.max(np.abs(tr.d_hat)) <= 1e-9


def test_constant_disturbance_decay():
    tr = _observer_run(DisturbanceSignal.constant(1.0), 3.0)
    err = np.abs(tr.d_hat - tr.w_true)
    assert err[0] == 1.0
    assert np.all(err <= np.exp(-10 * tr.t) + 1e-6)


def test_sine_steady_state_bound():
    tr = _observer_run(DisturbanceSignal.sine(1.0), 50.0)
    mask = tr.t >= 5
    err = np.max(np.abs(tr.d_hat[mask] - tr.w_true[mask]))
    bound = 1 / math.sqrt(101)
    assert err <= 1.02 * bound
    assert err >= 0.98 * bound


def test_error_dynamics_along_trajectory():
    dist = DisturbanceSignal.sum_of_sines([(1, 1, 0), (-0.5, 2, 0)])
    tr = _observer_run(dist, 10.0)
    e = tr.d_hat - tr.w_true
    dt = tr.t[1] - tr.t[0]
    edot = (e[2:] - e[:-2]) / (2 * dt)
    wdot = np.cos(tr.t[1:-1]) - np.cos(2 * tr.t[1:-1])
    # w is held over each step, which costs at most gain * dt * sup|w'| against continuous time
    assert np.max(np.abs(edot - (-10 * e[1:-1] - wdot))) <= 10 * dt * 2.0


def test_held_disturbance_update_is_exact():
    # with w held over a step the estimate relaxes as an exact exponential
    dist = DisturbanceSignal.sum_of_sines([(1, 1, 0), (-0.5, 2, 0)])
    tr = _observer_run(dist, 5.0)
    dt = tr.t[1] - tr.t[0]
    step = np.diff(tr.d_hat)
    expected = (1 - math.exp(-10 * dt)) * (tr.w_true[:-1] - tr.d_hat[:-1])
    assert np.max(np.abs(step - expected)) <= 1e-10


def test_acc_observer_tracks_acceleration_units():
    acc = AccBenchmark()
    tr = _observer_run(DisturbanceSignal.constant(0.4), 2.0, plant=acc, x0=(15, 15, 100))
    assert abs(tr.d_hat[-1] - 0.4) <= 0.4 * math.exp(-20) + 1e-9


def test_standalone_step_matches_decay():
    # plant x2' = u + w integrated exactly for constant u, w
    u, w, dt, gain = 0.3, 1.0, 1e-3, 10.0
    x = np.array([0.0, 0.0])
    obs = init_observer(LIN, x, gain)
    for k in range(2000):
        x_next = x + dt * np.array([-(x[1] + 0.5 * dt * (u + w)), u + w])
        obs = observer_step(obs, LIN, x, [u], dt, t=k * dt, x_next=x_next)
        x = x_next
        assert abs(obs.d_hat - w) <= math.exp(-gain * (k + 1) * dt) + 1e-6


def test_gain_must_be_positive():
    with pytest.raises(DomainError):
        init_observer(LIN, [0.0, 0.0], 0.0)
    with pytest.raises(DomainError):
        observer_step(init_observer(LIN, [0.0, 0.0], 1.0), LIN, [0.0, 0.0], [0.0], 0.0)


def test_error_shrinks_with_gain():
    dist = DisturbanceSignal.sum_of_sines([(1, 1, 0), (-0.5, 2, 0)])
    errs = [max_estimation_error(_observer_run(dist, 15.0, gain=g)) for g in (5.0, 10.0, 20.0)]
    assert errs[0] > errs[1] > errs[2]


def _steady_state_error_sup(terms, gain):
    """sup |e| for e = -(s / (s + gain)) w, evaluated from the frequency response."""
    t = np.linspace(0, 4 * math.pi, 200001)
    e = np.zeros_like(t)
    for amp, freq, phase in terms:
        mag = freq / math.hypot(freq, gain)
        lead = math.pi / 2 - math.atan2(freq, gain)
        e -= amp * mag * np.sin(freq * t + phase + lead)
    return float(np.max(np.abs(e)))


ACC_TERMS = [(1, 1, 0), (-0.5, 2, 0)]


def test_acc_disturbance_error_matches_frequency_response():
    tr = _observer_run(DisturbanceSignal.sum_of_sines(ACC_TERMS), 20.0)
    oracle = _steady_state_error_sup(ACC_TERMS, 10.0)
    assert oracle == pytest.approx(0.1972, abs=5e-4)
    assert max_estimation_error(tr, after=1.0) == pytest.approx(oracle, rel=0.02)


@pytest.mark.xfail(strict=True, reason="first-order lag for this disturbance peaks near 0.197, above 0.15")
def test_acc_disturbance_error_below_0_15():
    tr = _observer_run(DisturbanceSignal.sum_of_sines(ACC_TERMS), 20.0)
    assert max_estimation_error(tr, after=1.0) < 0.15
