"""Affine-in-input constraints for the barrier-function variants.

Every builder returns a :class:`HalfspaceConstraint` ``a.u + b >= 0``.
For relative degree ``r >= 2`` the variant's condition is imposed on the
last element of the chain

    psi_0 = h,   psi_i = d/dt psi_{i-1} + alpha_i(psi_{i-1})

whose time derivative is affine in the input, ``c0 + c1.u``. The chain
is differentiated directly with truncated Taylor arithmetic, so any
class-K shape works without assembling the cross terms by hand.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .barrier_core import SINGULAR_BAND, ClassKFn
from .exceptions import ConfigError, DomainError, ModelError, SingularityError
from .safety_filter import HalfspaceConstraint

_RELDEG_TOL = 1e-9


class Variant(str, enum.Enum):
    ZCBF = "zcbf"
    RCBF = "rcbf"
    RRCBF = "rrcbf"
    ROCBF = "rocbf"
    DOCBF = "docbf"
    DORRCBF = "dorrcbf"
    HORRCBF = "horrcbf"
    HODORRCBF = "hodorrcbf"

    @property
    def family(self) -> "Variant":
        """The first-order condition this variant imposes at the chain's end."""
        return _FAMILY.get(self, self)

    @property
    def uses_estimate(self) -> bool:
        return _FAMILY.get(self, self) in (Variant.DOCBF, Variant.DORRCBF)

    @property
    def reciprocal(self) -> bool:
        return _FAMILY.get(self, self) in (Variant.RCBF, Variant.RRCBF, Variant.DORRCBF)

    @property
    def needs_beta(self) -> bool:
        return _FAMILY.get(self, self) in (Variant.RRCBF, Variant.DORRCBF)


_FAMILY = {Variant.HORRCBF: Variant.RRCBF, Variant.HODORRCBF: Variant.DORRCBF}


@dataclass(frozen=True)
class ErrorBoundPolicy:
    """Estimation-error bound ``eps_d(t)`` subtracted by the observer-based CBF.

    ``none`` drops the term, ``constant`` uses ``eps0``, ``decaying`` uses
    ``eps_inf + (eps0 - eps_inf) exp(-rate t)``.
    """

    kind: str = "none"
    eps0: float = 0.0
    rate: float = 0.0
    eps_inf: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "constant", "decaying"):
            raise ConfigError(f"unknown error-bound policy {self.kind!r}")
        if min(self.eps0, self.rate, self.eps_inf) < 0:
            raise ConfigError("error-bound parameters must be nonnegative")

    def value(self, t: float) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return self.eps0
        return self.eps_inf + (self.eps0 - self.eps_inf) * math.exp(-self.rate * t)

    def describe(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "constant":
            return f"constant {self.eps0!r}"
        return f"decaying {self.eps0!r} {self.rate!r} {self.eps_inf!r}"

    @classmethod
    def parse(cls, text: str) -> "ErrorBoundPolicy":
        parts = text.split()
        try:
            if parts == ["none"]:
                return cls()
            if len(parts) == 2 and parts[0] == "constant":
                return cls("constant", eps0=float(parts[1]))
            if len(parts) == 4 and parts[0] == "decaying":
                e0, rate, einf = map(float, parts[1:])
                return cls("decaying", eps0=e0, rate=rate, eps_inf=einf)
        except ValueError:
            pass
        raise ConfigError(f"bad error-bound policy {text!r}")


@dataclass(frozen=True)
class CbfVariantConfig:
    """Which barrier condition to impose and with what parameters.

    ``alpha_chain`` has one class-K function per order of the safety
    function; for the reciprocal CBF its last entry is the bound ``alpha_3``.
    ``disturbance_bound`` (robust variant) and the error-bound policy are in
    input units.
    """

    variant: Variant
    alpha_chain: Tuple[ClassKFn, ...]
    beta: Optional[ClassKFn] = None
    sigma: float = 0.0
    disturbance_bound: Optional[float] = None
    error_bound: ErrorBoundPolicy = field(default_factory=ErrorBoundPolicy)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "alpha_chain", tuple(self.alpha_chain))
        if not self.alpha_chain:
            raise ConfigError("alpha_chain needs at least one class-K function")
        if self.variant.needs_beta and self.beta is None:
            raise ConfigError(f"variant {self.variant.value} requires beta")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.variant.family is Variant.ROCBF and (self.disturbance_bound is None or self.disturbance_bound < 0):
            raise ConfigError("the robust variant needs a nonnegative disturbance_bound")

    @property
    def order(self) -> int:
        return len(self.alpha_chain)


@dataclass(frozen=True)
class PsiChain:
    """``psi_0 .. psi_{r-1}`` at a state, plus ``psi_{r-1}' = c0 + c1.u``."""

    values: Tuple[float, ...]
    c0: float
    c1: np.ndarray


# --- truncated Taylor arithmetic -------------------------------------------

def _compose(fn: ClassKFn, jet: Sequence[float]) -> list:
    """Time-derivative jet of ``fn(p(t))`` from the jet of ``p``."""
    order = len(jet) - 1
    if fn.kind == "linear":
        return [fn.gain * v for v in jet]
    derivs = fn.derivatives(jet[0], order)
    if order == 0:
        return [derivs[0]]
    # Taylor coefficients of delta(t) = p(t) - p(0)
    delta = np.array([0.0] + [jet[k] / math.factorial(k) for k in range(1, order + 1)])
    out = np.zeros(order + 1)
    out[0] = derivs[0]
    power = np.zeros(order + 1)
    power[0] = 1.0
    for j in range(1, order + 1):
        power = np.convolve(power, delta)[: order + 1]
        if derivs[j] != 0.0:
            out += derivs[j] / math.factorial(j) * power
    return [out[k] * math.factorial(k) for k in range(order + 1)]


def _chain_jets(alpha_chain, jet):
    """Jets of ``psi_0 .. psi_{r-1}``; ``psi_i`` carries ``r - i + 1`` terms."""
    jets = [list(jet)]
    for i in range(1, len(alpha_chain)):
        prev = jets[-1]
        comp = _compose(alpha_chain[i - 1], prev[:-1])
        jets.append([prev[k + 1] + comp[k] for k in range(len(prev) - 1)])
    return jets


def _check_relative_degree(gains, r):
    if len(gains) < r:
        raise ModelError(f"plant supplies {len(gains)} input gains, relative degree {r} needs {r}")
    for k in range(r - 1):
        if any(abs(v) > _RELDEG_TOL for v in gains[k]):
            raise ModelError(f"L_g L_f^{k} h = {gains[k]} is not zero; relative degree is below {r}")


def build_psi_chain(config: CbfVariantConfig, plant, x, t: float = 0.0) -> PsiChain:
    """Evaluate the chain of the plant's safety function at ``x``."""
    r = plant.relative_degree
    if config.order != r:
        raise ConfigError(f"alpha_chain has {config.order} entries but the relative degree is {r}")
    jet, gains = plant.lie_jet(x, t)
    _check_relative_degree(gains, r)
    jets = _chain_jets(config.alpha_chain, jet)
    last = jets[-1]
    return PsiChain(values=tuple(j[0] for j in jets), c0=last[1], c1=np.asarray(gains[r - 1], dtype=float).reshape(-1))


def _terminal_constraint(config, value, c0, c1, t, d_hat):
    """Impose the variant's first-order condition on ``(value, c0 + c1.u)``."""
    fam = config.variant.family
    alpha = config.alpha_chain[-1]
    shift = 0.0
    if fam.uses_estimate:
        if d_hat is None:
            raise DomainError(f"variant {config.variant.value} needs a disturbance estimate")
        # added last so each variant's b nests exactly inside its parent's
        shift = float(np.dot(c1, np.atleast_1d(d_hat)))
    elif d_hat is not None:
        raise DomainError(f"variant {config.variant.value} does not take a disturbance estimate")

    if fam.reciprocal:
        shifted = value + (config.sigma if fam is not Variant.RCBF else 0.0)
        if shifted <= SINGULAR_BAND:
            raise SingularityError(f"barrier value {value} is at the reciprocal pole")

    if fam in (Variant.ZCBF, Variant.DOCBF, Variant.ROCBF):
        b = c0 + alpha(value)
        if fam is Variant.ROCBF:
            b -= float(np.linalg.norm(c1)) * config.disturbance_bound
        elif fam is Variant.DOCBF:
            b -= float(np.linalg.norm(c1)) * config.error_bound.value(t)
        return HalfspaceConstraint(c1, b + shift)
    if fam is Variant.RCBF:
        # B = 1/h: -dB/dt <= alpha_3(h)  <=>  h'/h^2 + alpha_3(h) >= 0
        inv2 = 1.0 / (value * value)
        return HalfspaceConstraint(c1 * inv2, c0 * inv2 + alpha(value))
    # RRCBF / DORRCBF
    b = c0 + alpha(value) - config.beta(1.0 / (value + config.sigma))
    return HalfspaceConstraint(c1, b + shift)


def build_constraint(config: CbfVariantConfig, plant, x, d_hat=None, t: float = 0.0) -> HalfspaceConstraint:
    """Constraint for a first-order safety function, routed to the chain when ``r >= 2``."""
    if plant.relative_degree >= 2:
        return build_ho_constraint(config, plant, x, d_hat, t)
    if config.order != 1:
        raise ConfigError(f"alpha_chain has {config.order} entries but the relative degree is 1")
    jet, gains = plant.lie_jet(x, t)
    return _terminal_constraint(config, jet[0], jet[1], np.atleast_1d(gains[0]).astype(float), t, d_hat)


def build_ho_constraint(config: CbfVariantConfig, plant, x, d_hat=None, t: float = 0.0) -> HalfspaceConstraint:
    """Impose the variant's condition on ``psi_{r-1}``.

    With ``r = 1`` the chain is just ``h`` and this coincides with
    :func:`build_constraint`.
    """
    chain = build_psi_chain(config, plant, x, t)
    return _terminal_constraint(config, chain.values[-1], chain.c0, chain.c1, t, d_hat)


def constraint_and_chain(config: CbfVariantConfig, plant, x, d_hat=None, t: float = 0.0):
    """Both the constraint and the chain values, evaluating the jet once."""
    chain = build_psi_chain(config, plant, x, t)
    return _terminal_constraint(config, chain.values[-1], chain.c0, chain.c1, t, d_hat), chain
