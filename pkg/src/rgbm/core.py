"""Model parameters, contract types and shared numerical primitives."""

from __future__ import annotations

import math
import numbers
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from scipy.special import ndtr

__all__ = [
    "ModelParams",
    "OptionKind",
    "OptionSpec",
    "PricingIntermediates",
    "ParamError",
    "PricingError",
    "norm_cdf",
    "theta_exponent",
    "validate_params",
]


class ParamError(ValueError):
    """Invalid model parameters; ``code`` names the violated invariant."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class PricingError(ValueError):
    """A pricing request outside the domain of the formula being evaluated."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


@dataclass(frozen=True)
class ModelParams:
    """Reflected GBM market: drift, volatility, boundary, rates and start price.

    Construction does not validate; pass through :func:`validate_params`.
    """

    mu: float
    sigma: float
    b: float
    r: float = 0.0
    q: float = 0.0
    s0: float = 1.0

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


class OptionKind(str, Enum):
    CALL = "call"
    PUT = "put"
    NNEG = "nneg"


@dataclass(frozen=True)
class OptionSpec:
    kind: OptionKind
    strike: float
    maturity: float
    valuation_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", OptionKind(self.kind))
        if not (math.isfinite(self.strike) and math.isfinite(self.maturity)
                and math.isfinite(self.valuation_time)):
            raise PricingError("non_finite", "option fields must be finite")
        if self.strike < 0:
            raise PricingError("negative_strike", f"strike={self.strike}")
        if not 0.0 <= self.valuation_time <= self.maturity:
            raise PricingError("bad_times", "need 0 <= valuation_time <= maturity")

    @property
    def tau(self) -> float:
        return self.maturity - self.valuation_time

    def payoff(self, s):
        if self.kind is OptionKind.CALL:
            return max(s - self.strike, 0.0)
        return max(self.strike - s, 0.0)


@dataclass(frozen=True)
class PricingIntermediates:
    """Arguments of the normal CDFs for one formula evaluation.

    The z-values belong to the formula family named by ``family``; the
    vanilla and NNEG formulas define z1..z4 differently and the two sets are
    never interchangeable. The vanilla family has no ``z2``.
    """

    family: str
    theta: float
    tau: float
    z1: float
    z3: float
    z4: float
    z2: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"family": self.family, "theta": self.theta, "tau": self.tau, "z1": self.z1}
        if self.z2 is not None:
            d["z2"] = self.z2
        d["z3"] = self.z3
        d["z4"] = self.z4
        return d


def norm_cdf(x):
    """Standard normal CDF (scalar or array)."""
    return ndtr(x)


def theta_exponent(r: float, q: float, sigma: float) -> float:
    """2(r - q) / sigma**2."""
    if not sigma > 0:
        raise ParamError("sigma_nonpositive", f"sigma={sigma}")
    return 2.0 * (r - q) / (sigma * sigma)


def validate_params(raw: ModelParams) -> ModelParams:
    """Return ``raw`` unchanged if every invariant holds, else raise ParamError."""
    for name in ("mu", "sigma", "b", "r", "q", "s0"):
        v = getattr(raw, name)
        if not isinstance(v, numbers.Real) or not math.isfinite(v):
            raise ParamError("non_finite", f"{name}={v!r}")
    if raw.sigma <= 0:
        raise ParamError("sigma_nonpositive", f"sigma={raw.sigma}")
    if raw.b <= 0:
        raise ParamError("boundary_nonpositive", f"b={raw.b}")
    if raw.s0 < raw.b:
        raise ParamError("start_below_boundary", f"s0={raw.s0} < b={raw.b}")
    if raw.r < 0:
        raise ParamError("negative_rate", f"r={raw.r}")
    if raw.q < 0:
        raise ParamError("negative_rate", f"q={raw.q}")
    return raw
