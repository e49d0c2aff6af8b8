"""One-dimensional reciprocal-resistance dynamics ``z' = -alpha z + beta/z + w``.

This is the scalar prototype behind the barrier construction: the
``beta/z`` term dominates any bounded ``w`` close to ``z = 0``, so the
state stays strictly positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DomainError, PositivityError
from .sim_engine import rk4_step


@dataclass(frozen=True)
class ScalarRrParams:
    alpha: float
    beta: float
    w_bar: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")
        if not self.w_bar >= 0:
            raise DomainError(f"w_bar must be nonnegative, got {self.w_bar}")


@dataclass(frozen=True)
class WorstCaseRoots:
    z1: float
    z2: float
    z_eq: float


def analytic_solution(params: ScalarRrParams, z0: float, t: float) -> float:
    """Closed-form undisturbed solution; ``w_bar`` is ignored."""
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0}")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    ratio = params.beta / params.alpha
    return math.sqrt((z0 * z0 - ratio) * math.exp(-2.0 * params.alpha * t) + ratio)


def worst_case_roots(params: ScalarRrParams) -> WorstCaseRoots:
    """Positive roots of ``-alpha z^2 -/+ w_bar z + beta``.

    Below ``z1`` the flow points up for every admissible disturbance,
    above ``z2`` it points down.
    """
    a, b, w = params.alpha, params.beta, params.w_bar
    disc = math.sqrt(w * w + 4.0 * a * b)
    # rationalised form of (disc - w) / 2a avoids cancellation for large w
    z1 = 2.0 * b / (disc + w)
    z2 = (disc + w) / (2.0 * a)
    return WorstCaseRoots(z1=z1, z2=z2, z_eq=math.sqrt(b / a))


def zdot(params: ScalarRrParams, z: float, w: float = 0.0) -> float:
    if not z > 0:
        raise DomainError(f"z must be positive (pole at 0), got {z}")
    return -params.alpha * z + params.beta / z + w


def simulate(
    params: ScalarRrParams,
    z0: float,
    t_final: float,
    dt: float = 1e-3,
    disturbance: Callable[[float], float] = None,
):
    """Integrate the scalar dynamics with the fixed-step RK4 scheme.

    The disturbance is sampled at the start of each step and held.

    Returns:
        ``(t, z)`` arrays of length ``steps + 1``.

    Raises:
        PositivityError: a step landed at ``z <= 0``. Never clamped.
    """
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0}")
    n = int(round(t_final / dt))
    ts = np.arange(n + 1) * dt
    zs = np.empty(n + 1)
    zs[0] = z = float(z0)
    a, b = params.alpha, params.beta
    for k in range(n):
        t = ts[k]
        w = disturbance(t) if disturbance is not None else 0.0
        z = rk4_step(lambda _t, s: -a * s + b / s + w, t, z, dt)
        if not z > 0:
            raise PositivityError(f"z = {z} at t = {ts[k + 1]}; step size too large for this stiffness")
        zs[k + 1] = z
    return ts, zs
