"""Nonlinear disturbance observer on a single matched channel.

With the channel ``x_d' = f_d(x) + g_u(x).u + g_w w`` and the linear
auxiliary function ``p(x) = L x_d``, the observer is

    z'    = -L g_w (z + L x_d) - L (f_d + g_u.u)
    w_hat = z + L x_d

so that ``w_hat' = L g_w (w - w_hat)``: first-order tracking of ``w``
at rate ``L g_w``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .sim_engine import rk4_step


@dataclass(frozen=True)
class ObserverState:
    z_internal: float
    gain: float
    d_hat: float

    def __post_init__(self):
        if not self.gain > 0:
            raise DomainError(f"observer gain must be positive, got {self.gain}")


def init_observer(plant, x, gain: float, d_hat0: float = 0.0, t: float = 0.0) -> ObserverState:
    """Observer state whose initial estimate equals ``d_hat0``."""
    x_d = plant.observer_channel(x, t)[0]
    return ObserverState(z_internal=d_hat0 - gain * x_d, gain=gain, d_hat=d_hat0)


def observer_rhs(gain: float, z: float, plant, x, u, t: float = 0.0) -> float:
    """Time derivative of the auxiliary observer state; ``u`` is an input-space array."""
    x_d, f_d, g_u, g_w = plant.observer_channel(x, t)
    gu = g_u[0] * u[0] if len(g_u) == 1 else float(np.dot(g_u, u))
    return -gain * g_w * (z + gain * x_d) - gain * (f_d + gu)


def estimate(gain: float, z: float, plant, x, t: float = 0.0) -> float:
    return z + gain * plant.observer_channel(x, t)[0]


def observer_step(obs: ObserverState, plant, x, u, dt: float, t: float = 0.0, x_next=None) -> ObserverState:
    """Advance the observer by one step.

    The measured state is held at ``x`` over the step unless ``x_next`` is
    given, in which case it is interpolated linearly. Closed-loop
    simulations integrate the observer jointly with the plant instead
    (see :func:`rrcbf.sim_engine.run_scenario`).
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x_next is None:
        x_at = lambda s: x
    else:
        x_next = np.asarray(x_next, dtype=float)
        x_at = lambda s: x + (s - t) / dt * (x_next - x)
    z = rk4_step(lambda s, zz: observer_rhs(obs.gain, zz, plant, x_at(s), u, s), t, obs.z_internal, dt)
    x_end = x if x_next is None else x_next
    return ObserverState(z_internal=z, gain=obs.gain, d_hat=estimate(obs.gain, z, plant, x_end, t + dt))
