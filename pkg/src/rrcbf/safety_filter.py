"""Minimally invasive safety filter for a single affine constraint.

Solves ``min ||u - u0||^2  s.t.  a.u + b >= 0`` (plus box bounds in the
scalar case) in closed form. No general QP solver is involved.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DomainError


class FilterStatus(str, enum.Enum):
    INACTIVE = "inactive"
    ACTIVE = "active"
    CLAMPED_FEASIBLE = "clamped"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class HalfspaceConstraint:
    """``a . u + b >= 0`` on the input."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = self.a
        if not (isinstance(a, np.ndarray) and a.ndim == 1 and a.dtype == np.float64):
            a = np.atleast_1d(np.asarray(a, dtype=float))
        if not np.isfinite(a).all():
            raise DomainError(f"constraint normal must be finite, got {a}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    def value(self, u) -> float:
        return float(np.dot(self.a, np.atleast_1d(u)) + self.b)


@dataclass(frozen=True)
class FilterResult:
    u_applied: np.ndarray
    status: FilterStatus
    slack: float
    kkt_residual: float


def filter_scalar(u0: float, c: HalfspaceConstraint, u_min: float = -math.inf,
                  u_max: float = math.inf) -> FilterResult:
    """Exact projection of ``u0`` onto ``{u : a u + b >= 0} ∩ [u_min, u_max]``.

    When the intersection is empty the box point with the largest slack is
    returned and flagged ``INFEASIBLE``; the caller keeps running.
    """
    if u_min > u_max:
        raise ConfigError(f"input bounds are inverted: [{u_min}, {u_max}]")
    if c.a.size != 1:
        raise DomainError("filter_scalar needs a one-dimensional constraint")
    a, b = float(c.a[0]), c.b
    u0 = float(u0)

    lo, hi = u_min, u_max
    boundary = None
    if a > 0:
        boundary = -b / a
        lo = max(lo, boundary)
    elif a < 0:
        boundary = -b / a
        hi = min(hi, boundary)
    elif b < 0:
        lo, hi = math.inf, -math.inf

    if lo > hi:
        if a > 0:
            u = u_max
        elif a < 0:
            u = u_min
        else:
            u = min(max(u0, u_min), u_max)
        return FilterResult(np.array([u]), FilterStatus.INFEASIBLE, a * u + b, math.nan)

    u = min(max(u0, lo), hi)
    if u == u0:
        return FilterResult(np.array([u]), FilterStatus.INACTIVE, a * u + b, 0.0)
    if boundary is not None and u == boundary:
        slack = a * u + b
        # stationarity: u - u0 = lam * a with lam >= 0
        lam = (u - u0) / a
        kkt = max(abs(slack), max(0.0, -lam) * abs(a))
        return FilterResult(np.array([u]), FilterStatus.ACTIVE, slack, kkt)
    # clipped by the box; the box multiplier carries the whole correction
    slack = a * u + b
    return FilterResult(np.array([u]), FilterStatus.CLAMPED_FEASIBLE, slack, max(0.0, -slack))


def filter_projection(u0, c: HalfspaceConstraint) -> FilterResult:
    """Euclidean projection onto the halfspace, any input dimension, no box."""
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    a, b = c.a, c.b
    nrm2 = float(np.dot(a, a))
    val = float(np.dot(a, u0) + b)
    if nrm2 == 0.0:
        status = FilterStatus.INACTIVE if b >= 0 else FilterStatus.INFEASIBLE
        return FilterResult(u0.copy(), status, b, 0.0 if b >= 0 else math.nan)
    if val >= 0:
        return FilterResult(u0.copy(), FilterStatus.INACTIVE, val, 0.0)
    u = u0 + (-val / nrm2) * a
    slack = float(np.dot(a, u) + b)
    return FilterResult(u, FilterStatus.ACTIVE, slack, abs(slack))


def apply_filter(u0, c: HalfspaceConstraint, bounds=None) -> FilterResult:
    """Dispatch to the scalar or the unbounded vector filter."""
    if c.a.size == 1:
        lo, hi = bounds if bounds is not None else (-math.inf, math.inf)
        return filter_scalar(float(np.atleast_1d(u0)[0]), c, lo, hi)
    if bounds is not None:
        raise DomainError("box bounds are only supported for scalar inputs")
    return filter_projection(u0, c)
