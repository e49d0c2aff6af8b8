"""Class-K functions, safe-function specs, and the crossing-point solver.

The crossing point is the unique positive root of

    alpha(s) + offset = beta(1 / (s + sigma))

which gives the buffer threshold ``h_s`` (offset 0, sigma 0), the
disturbance-shifted threshold ``h_b`` (offset = D) and the regularised
threshold ``h_p`` (sigma > 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np

from .exceptions import DomainError, NoRootError, SingularityError

#: ``h + sigma`` at or below this value is treated as the pole of ``1/h``.
SINGULAR_BAND = 1e-12

_BRACKET_MIN = 1e-12
_BRACKET_MAX = 1e12


@dataclass(frozen=True)
class ClassKFn:
    """Strictly increasing scalar function with ``f(0) = 0``.

    Three shapes are supported. Use the constructors rather than the raw
    fields::

        ClassKFn.linear(2.0)              # 2 s
        ClassKFn.power(1.0, 3.0)          # sign(s) |s|**3
        ClassKFn.table([(0, 0), (1, 2)])  # piecewise linear

    All three are extended class-K: they are defined (odd-symmetric for
    ``power``, linearly extrapolated for ``table``) on negative arguments.
    """

    kind: str
    gain: float = 1.0
    exponent: float = 1.0
    knots: Tuple[Tuple[float, float], ...] = ()
    _xs: np.ndarray = field(default=None, repr=False, compare=False)
    _ys: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("linear", "power", "table"):
            raise DomainError(f"unknown class-K kind {self.kind!r}")
        if self.kind in ("linear", "power"):
            if not (self.gain > 0 and math.isfinite(self.gain)):
                raise DomainError(f"class-K gain must be positive, got {self.gain}")
            if not (self.exponent > 0 and math.isfinite(self.exponent)):
                raise DomainError(f"class-K exponent must be positive, got {self.exponent}")
        if self.kind == "table":
            if len(self.knots) < 2:
                raise DomainError("a monotone table needs at least two knots")
            xs = np.array([float(k[0]) for k in self.knots])
            ys = np.array([float(k[1]) for k in self.knots])
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise DomainError("table knots must be strictly increasing in both coordinates")
            zero = np.flatnonzero(xs == 0.0)
            if zero.size != 1 or ys[zero[0]] != 0.0:
                raise DomainError("table knots must pass through (0, 0)")
            object.__setattr__(self, "_xs", xs)
            object.__setattr__(self, "_ys", ys)

    @classmethod
    def linear(cls, gain: float) -> "ClassKFn":
        return cls("linear", gain=float(gain))

    @classmethod
    def power(cls, gain: float, exponent: float) -> "ClassKFn":
        return cls("power", gain=float(gain), exponent=float(exponent))

    @classmethod
    def table(cls, knots: Sequence[Tuple[float, float]]) -> "ClassKFn":
        return cls("table", knots=tuple((float(a), float(b)) for a, b in knots))

    def __call__(self, s: float) -> float:
        return self.evaluate(s)

    def evaluate(self, s: float) -> float:
        if self.kind == "linear":
            return self.gain * s
        if self.kind == "power":
            return self.gain * math.copysign(abs(s) ** self.exponent, s)
        return _interp_extrap(s, self._xs, self._ys)

    def inverse(self, y: float) -> float:
        if self.kind == "linear":
            return y / self.gain
        if self.kind == "power":
            return math.copysign((abs(y) / self.gain) ** (1.0 / self.exponent), y)
        return _interp_extrap(y, self._ys, self._xs)

    def derivatives(self, s: float, order: int) -> list:
        """Return ``[f(s), f'(s), ..., f^(order)(s)]``."""
        out = [self.evaluate(s)]
        if order == 0:
            return out
        if self.kind == "linear":
            return out + [self.gain] + [0.0] * (order - 1)
        if self.kind == "table":
            xs, ys = self._xs, self._ys
            i = int(np.clip(np.searchsorted(xs, s, side="right") - 1, 0, len(xs) - 2))
            slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            return out + [float(slope)] + [0.0] * (order - 1)
        p = self.exponent
        coef = 1.0
        a = abs(s)
        for k in range(1, order + 1):
            coef *= p - k + 1
            if coef == 0.0:
                out.append(0.0)
                continue
            mag = self.gain * coef * a ** (p - k) if a > 0 or p - k >= 0 else math.inf
            # odd derivatives of an odd function are even, and vice versa
            out.append(mag if k % 2 == 1 else math.copysign(mag, s))
        return out

    def describe(self) -> str:
        """Config-file spelling, e.g. ``linear 2`` or ``table 0 0 1 2``."""
        if self.kind == "linear":
            return f"linear {self.gain!r}"
        if self.kind == "power":
            return f"power {self.gain!r} {self.exponent!r}"
        return "table " + " ".join(f"{a!r} {b!r}" for a, b in self.knots)

    @classmethod
    def parse(cls, text: str) -> "ClassKFn":
        """Inverse of :meth:`describe`. A bare number means a linear gain."""
        parts = text.split()
        if not parts:
            raise DomainError("empty class-K specification")
        try:
            if len(parts) == 1:
                return cls.linear(float(parts[0]))
            kind, nums = parts[0], [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise DomainError(f"bad class-K specification {text!r}") from exc
        if kind == "linear" and len(nums) == 1:
            return cls.linear(nums[0])
        if kind == "power" and len(nums) == 2:
            return cls.power(*nums)
        if kind == "table" and len(nums) >= 4 and len(nums) % 2 == 0:
            return cls.table(list(zip(nums[0::2], nums[1::2])))
        raise DomainError(f"bad class-K specification {text!r}")


def _interp_extrap(s, xs, ys):
    if s <= xs[0]:
        return float(ys[0] + (s - xs[0]) * (ys[1] - ys[0]) / (xs[1] - xs[0]))
    if s >= xs[-1]:
        return float(ys[-1] + (s - xs[-1]) * (ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))
    return float(np.interp(s, xs, ys))


@dataclass(frozen=True)
class SafeFunctionSpec:
    """A safety function ``h`` with its gradient.

    Higher Lie derivatives are supplied by the plant (see ``PlantModel.lie_jet``).
    """

    h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    name: str = "h"

    def lie_f(self, drift: np.ndarray, x: np.ndarray) -> float:
        return float(np.dot(self.grad_h(x), drift))

    def lie_g(self, g: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.grad_h(x), dtype=float) @ np.asarray(g, dtype=float))


def gradient_check(spec: SafeFunctionSpec, x, step: float = 1e-6) -> float:
    """Relative error between ``grad_h`` and central differences of ``h``."""
    x = np.asarray(x, dtype=float)
    fd = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step * max(1.0, abs(x[i]))
        fd[i] = (spec.h(x + e) - spec.h(x - e)) / (2 * e[i])
    g = np.asarray(spec.grad_h(x), dtype=float)
    return float(np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g)))


@dataclass(frozen=True)
class CrossingPoint:
    h_s: float
    residual: float
    iterations: int


def solve_crossing(
    alpha: ClassKFn,
    beta: ClassKFn,
    offset: float = 0.0,
    sigma: float = 0.0,
) -> CrossingPoint:
    """Unique positive root of ``alpha(s) + offset - beta(1/(s + sigma))``.

    The left side is strictly increasing in ``s``, so a geometric bracket
    search from ``s = 1`` followed by bisection always converges when a
    positive root exists.

    Raises:
        DomainError: negative ``offset``/``sigma``, or ``sigma`` at or above
            ``1 / beta^-1(offset)`` (no positive root).
        NoRootError: no sign change inside ``[1e-12, 1e12]``.
    """
    if offset < 0 or sigma < 0:
        raise DomainError("offset and sigma must be nonnegative")
    if sigma > 0 and offset > 0 and sigma >= 1.0 / beta.inverse(offset):
        raise DomainError(
            f"sigma={sigma} must be below 1/beta^-1(offset)={1.0 / beta.inverse(offset)}"
        )

    def f(s):
        return alpha(s) + offset - beta(1.0 / (s + sigma))

    lo = hi = 1.0
    iterations = 0
    if f(1.0) > 0:
        while f(lo) > 0:
            lo *= 0.5
            iterations += 1
            if lo < _BRACKET_MIN:
                raise NoRootError("no sign change above 1e-12")
        hi = 2.0 * lo
    else:
        while f(hi) < 0:
            hi *= 2.0
            iterations += 1
            if hi > _BRACKET_MAX:
                raise NoRootError("no sign change below 1e12")
        lo = 0.5 * hi if hi > 1.0 else lo

    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return CrossingPoint(lo, 0.0, iterations)
    if fhi == 0.0:
        return CrossingPoint(hi, 0.0, iterations)
    # bisect until the bracket is exhausted in floating point
    while True:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if fm < 0:
            lo = mid
        else:
            hi = mid
    root = lo if abs(f(lo)) <= abs(f(hi)) else hi
    return CrossingPoint(root, f(root), iterations)


def rrbf_residual(
    spec: SafeFunctionSpec,
    plant_drift: Callable[[np.ndarray], np.ndarray],
    x,
    alpha: ClassKFn,
    beta: ClassKFn,
    sigma: float = 0.0,
) -> float:
    """``L_f h + alpha(h) - beta(1/(h + sigma))`` at ``x``.

    Nonnegative on the whole interior of the safe set certifies the
    (practical, when ``sigma > 0``) reciprocal resistance condition.
    """
    x = np.asarray(x, dtype=float)
    hx = float(spec.h(x))
    shifted = hx + sigma
    if shifted <= SINGULAR_BAND:
        raise SingularityError(f"h + sigma = {shifted} is at the reciprocal pole")
    return spec.lie_f(plant_drift(x), x) + alpha(hx) - beta(1.0 / shifted)


def reciprocal_floor(beta: ClassKFn, sigma: float, bound: float) -> float:
    """``beta(1/sigma) - D``: the inward push left at ``h = 0`` after the worst disturbance."""
    if sigma <= 0:
        raise DomainError("the floor is only finite for sigma > 0")
    return beta(1.0 / sigma) - bound


def max_regularisation(beta: ClassKFn, bound: float) -> float:
    """Supremum ``1 / beta^-1(D)`` of admissible ``sigma`` values."""
    if bound <= 0:
        return math.inf
    return 1.0 / beta.inverse(bound)
