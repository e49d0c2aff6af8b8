"""Benchmark plants, their nominal controllers and disturbance signals.

Plants are control-affine with a matched disturbance::

    x' = f(x, t) + g(x) (u + d),   d = disturbance_scale * w

where ``w`` is the scalar lumped disturbance in the units the plant's
equations use (an acceleration for the cruise-control model).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .barrier_core import SafeFunctionSpec
from .exceptions import ConfigError

log = logging.getLogger(__name__)


class PlantModel:
    """Interface shared by the benchmark plants.

    Subclasses set ``state_dim``, ``input_dim``, ``relative_degree`` and
    ``disturbance_scale`` and implement the methods below.
    """

    state_dim: int
    input_dim: int
    relative_degree: int
    disturbance_scale: float = 1.0
    state_names: Tuple[str, ...] = ()

    def drift(self, x, t: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def input_matrix(self, x) -> np.ndarray:
        """``g(x)`` with shape ``(state_dim, input_dim)``."""
        raise NotImplementedError

    def rhs(self, x, v, t: float = 0.0) -> np.ndarray:
        """``f(x, t) + g(x) v`` where ``v`` is the total input-channel forcing."""
        return self.drift(x, t) + self.input_matrix(x) @ v

    def safe_function(self) -> SafeFunctionSpec:
        raise NotImplementedError

    def lie_jet(self, x, t: float = 0.0):
        """Drift Lie derivatives of ``h`` and the input gains.

        Returns:
            ``(jet, gains)`` where ``jet[k] = L_f^k h(x)`` for ``k = 0..r``
            and ``gains[k] = L_g L_f^k h(x)`` (an input-space vector) for
            ``k = 0..r-1``.
        """
        raise NotImplementedError

    def nominal_control(self, x, d_hat: float = 0.0, t: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def observer_channel(self, x, t: float = 0.0):
        """Scalar channel seen by the disturbance observer.

        Returns ``(x_d, f_d, g_u, g_w)`` with ``x_d' = f_d + g_u . u + g_w w``.
        """
        raise NotImplementedError

    def admissible(self, x) -> bool:
        return bool(np.all(np.isfinite(x)))

    def default_input_bounds(self) -> Optional[Tuple[float, float]]:
        return None

    def h(self, x) -> float:
        return float(self.safe_function().h(np.asarray(x, dtype=float)))


def eval_dynamics(plant: PlantModel, x, u, w: float, t: float = 0.0) -> np.ndarray:
    """Right-hand side ``f + g (u + scale * w)``.

    Evaluation outside the admissible box is logged but still performed,
    so unsafe excursions of a failing controller can be recorded.
    """
    x = np.asarray(x, dtype=float)
    if not plant.admissible(x):
        log.warning("state %s outside the admissible box at t=%g", x, t)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return plant.rhs(x, u + plant.disturbance_scale * w, t)


@dataclass(frozen=True)
class LinearBenchmark(PlantModel):
    """``x1' = -x2``, ``x2' = u + w`` with ``h = x1 - x2``.

    The nominal controller ``u0 = x1 - 2 x2 - setpoint`` has its
    equilibrium at ``(setpoint, 0)``; the default is 1.
    """

    setpoint: float = 1.0
    box: float = 1e3

    state_dim = 2
    input_dim = 1
    relative_degree = 1
    disturbance_scale = 1.0
    state_names = ("x1", "x2")

    def drift(self, x, t=0.0):
        return np.array([-x[1], 0.0])

    def input_matrix(self, x):
        return np.array([[0.0], [1.0]])

    def rhs(self, x, v, t=0.0):
        return np.array([-x[1], v[0]])

    def safe_function(self):
        return _LINEAR_H

    def lie_jet(self, x, t=0.0):
        return [x[0] - x[1], -x[1]], [np.array([-1.0])]

    def nominal_control(self, x, d_hat=0.0, t=0.0):
        return np.array([x[0] - 2.0 * x[1] - self.setpoint])

    def observer_channel(self, x, t=0.0):
        return x[1], 0.0, np.array([1.0]), 1.0

    def admissible(self, x):
        return all(abs(v) <= self.box for v in x)


_LINEAR_H = SafeFunctionSpec(
    h=lambda x: x[0] - x[1],
    grad_h=lambda x: np.array([1.0, -1.0]),
    name="x1 - x2",
)


@dataclass(frozen=True)
class AccBenchmark(PlantModel):
    """Adaptive cruise control: state ``(v_l, v_e, D)``, input wheel force.

    ``w`` enters the ego acceleration directly, i.e. as a force ``m w``
    on the input channel. The safety function is ``b(D) = D - D0``,
    relative degree two.

    Default vehicle constants follow the common ACC benchmark values and
    are meant to be overridden from config.
    """

    mass: float = 1650.0
    f0: float = 0.1
    f1: float = 5.0
    f2: float = 0.25
    gravity: float = 9.81
    d0: float = 80.0
    v_desired: float = 20.0
    k: float = 5.0
    leader_accel: float = 0.0
    force_fraction: float = 0.3

    state_dim = 3
    input_dim = 1
    relative_degree = 2
    state_names = ("v_l", "v_e", "D")

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"vehicle mass must be positive, got {self.mass}")

    @property
    def disturbance_scale(self):
        return self.mass

    def rolling_resistance(self, v_e: float) -> float:
        return self.f0 + self.f1 * v_e + self.f2 * v_e * v_e

    def drift(self, x, t=0.0):
        v_l, v_e, _ = x
        return np.array([self.leader_accel, -self.rolling_resistance(v_e) / self.mass, v_l - v_e])

    def input_matrix(self, x):
        return np.array([[0.0], [1.0 / self.mass], [0.0]])

    def rhs(self, x, v, t=0.0):
        v_l, v_e, _ = x
        return np.array([self.leader_accel, (v[0] - self.rolling_resistance(v_e)) / self.mass, v_l - v_e])

    def safe_function(self):
        return SafeFunctionSpec(
            h=lambda x: x[2] - self.d0,
            grad_h=lambda x: np.array([0.0, 0.0, 1.0]),
            name="D - D0",
        )

    def lie_jet(self, x, t=0.0):
        v_l, v_e, dist = x
        jet = [dist - self.d0, v_l - v_e,
               self.leader_accel + self.rolling_resistance(v_e) / self.mass]
        return jet, [np.array([0.0]), np.array([-1.0 / self.mass])]

    def nominal_control(self, x, d_hat=0.0, t=0.0):
        v_e = x[1]
        e_v = v_e - self.v_desired
        return np.array([-self.mass * (self.k * e_v - self.rolling_resistance(v_e) / self.mass + d_hat)])

    def observer_channel(self, x, t=0.0):
        v_e = x[1]
        return v_e, -self.rolling_resistance(v_e) / self.mass, np.array([1.0 / self.mass]), 1.0

    def admissible(self, x):
        return x[0] >= -1.0 and x[1] >= -1.0 and math.isfinite(x[2])

    def default_input_bounds(self):
        limit = self.force_fraction * self.mass * self.gravity
        return (-limit, limit)


DISTURBANCE_KINDS = ("zero", "constant", "sine", "sum_of_sines", "uniform_random_hold")


@dataclass(frozen=True)
class DisturbanceSignal:
    """Scalar disturbance ``w(t)``.

    ``terms`` holds ``(amplitude, frequency, phase)`` triples for the sine
    kinds; ``amplitude``/``hold_dt``/``seed`` drive the random kind, whose
    value is piecewise constant and fully determined by the seed.
    """

    kind: str = "zero"
    value: float = 0.0
    terms: Tuple[Tuple[float, float, float], ...] = ()
    amplitude: float = 0.0
    hold_dt: float = 0.1
    seed: int = 0
    _cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigError(f"unknown disturbance kind {self.kind!r}")
        if self.kind == "sine" and len(self.terms) != 1:
            raise ConfigError("a sine disturbance has exactly one term")
        if self.kind == "uniform_random_hold" and not self.hold_dt > 0:
            raise ConfigError("hold_dt must be positive")

    @classmethod
    def sine(cls, amplitude, frequency=1.0, phase=0.0):
        return cls("sine", terms=((float(amplitude), float(frequency), float(phase)),))

    @classmethod
    def sum_of_sines(cls, terms):
        return cls("sum_of_sines", terms=tuple(tuple(map(float, t)) for t in terms))

    @classmethod
    def constant(cls, value):
        return cls("constant", value=float(value))

    @classmethod
    def uniform_random_hold(cls, amplitude, hold_dt, seed=0):
        return cls("uniform_random_hold", amplitude=float(amplitude), hold_dt=float(hold_dt), seed=int(seed))

    def __call__(self, t: float) -> float:
        kind = self.kind
        if kind == "zero":
            return 0.0
        if kind == "constant":
            return self.value
        if kind in ("sine", "sum_of_sines"):
            return sum(a * math.sin(f * t + p) for a, f, p in self.terms)
        idx = int(math.floor(t / self.hold_dt + 1e-9))
        cache = self._cache
        if len(cache) <= idx:
            # regenerate from scratch so values never depend on query order
            rng = np.random.default_rng(self.seed)
            cache[:] = list(rng.uniform(-self.amplitude, self.amplitude, size=max(2 * idx + 16, 64)))
        return float(cache[idx])

    @property
    def bound(self) -> float:
        """A bound on ``|w(t)|`` valid for all ``t``."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "uniform_random_hold":
            return abs(self.amplitude)
        return sum(abs(a) for a, _, _ in self.terms)
