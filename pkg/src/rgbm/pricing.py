"""Closed-form and Monte Carlo option prices.

The reflected-GBM formulas are evaluated term by term as stated, including
the parameter regions where they break model-independent bounds. The
vanilla call/put family and the NNEG family use different z-arguments, so
each family has its own intermediate builder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ModelParams,
    OptionKind,
    OptionSpec,
    PricingError,
    PricingIntermediates,
    norm_cdf,
    theta_exponent,
    validate_params,
)
from .simulate import TimeGrid, terminal_values

__all__ = [
    "PriceQuote",
    "MCEstimate",
    "rgbm_call",
    "rgbm_put",
    "rgbm_nneg",
    "bs_call",
    "bs_put",
    "black76_put",
    "mc_price",
    "vanilla_intermediates",
    "nneg_intermediates",
]

_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class PriceQuote:
    value: float
    method: str
    intermediates: Optional[PricingIntermediates] = None
    std_error: Optional[float] = None
    bound: Optional[object] = None

    def to_dict(self) -> dict:
        d = {"method": self.method, "value": self.value}
        if self.std_error is not None:
            d["std_error"] = self.std_error
        if self.intermediates is not None:
            d["intermediates"] = self.intermediates.to_dict()
        if self.bound is not None:
            d["bound_status"] = self.bound.to_dict()
        return d


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int
    scheme: str = "exact"
    dt: float = math.nan

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error

    def to_quote(self) -> PriceQuote:
        return PriceQuote(self.mean, "monte_carlo", std_error=self.std_error)


def _pow(ratio: float, exponent: float) -> float:
    e = exponent * math.log(ratio)
    if abs(e) > _MAX_EXPONENT:
        raise PricingError("exponent_out_of_range", f"|{exponent} * log({ratio})| > {_MAX_EXPONENT}")
    return math.exp(e)


def _check_rgbm_inputs(spec: OptionSpec, kind: OptionKind, s: float, params: ModelParams) -> None:
    validate_params(params)
    if spec.kind is not kind:
        raise PricingError("wrong_kind", f"expected {kind.value}, got {spec.kind.value}")
    if not math.isfinite(s) or s < params.b:
        raise PricingError("below_boundary", f"s={s} < b={params.b}")
    if spec.strike < params.b:
        raise PricingError("strike_below_boundary", f"K={spec.strike} < b={params.b}")


def _require_theta(theta: float) -> None:
    if theta == 0.0:
        raise PricingError("theta_zero_unsupported", "the formula has a 1/theta factor")


def vanilla_intermediates(s: float, strike: float, tau: float, r: float, sigma: float, b: float) -> PricingIntermediates:
    vol = sigma * math.sqrt(tau)
    carry = (r + 0.5 * sigma * sigma) * tau
    z1 = (math.log(s / strike) + carry) / vol
    z3 = (math.log(b * b / (strike * s)) + carry) / vol
    z4 = (math.log(b / s) - (r - 0.5 * sigma * sigma) * tau) / vol
    return PricingIntermediates("vanilla", theta_exponent(r, 0.0, sigma), tau, z1=z1, z3=z3, z4=z4)


def nneg_intermediates(s: float, strike: float, tau: float, r: float, q: float, sigma: float, b: float) -> PricingIntermediates:
    vol = sigma * math.sqrt(tau)
    carry = (r - q + 0.5 * sigma * sigma) * tau
    z1 = (math.log(s / strike) + carry) / vol
    z2 = (math.log(b * b / (strike * s)) + carry) / vol
    z3 = (math.log(s / b) + carry) / vol
    z4 = (math.log(b / s) + carry) / vol
    return PricingIntermediates("nneg", theta_exponent(r, q, sigma), tau, z1=z1, z2=z2, z3=z3, z4=z4)


def rgbm_call(spec: OptionSpec, s: float, params: ModelParams) -> PriceQuote:
    """Reflected-GBM European call price in closed form."""
    _check_rgbm_inputs(spec, OptionKind.CALL, s, params)
    tau, K, b, r, sigma = spec.tau, spec.strike, params.b, params.r, params.sigma
    if tau == 0.0:
        return PriceQuote(max(s - K, 0.0), "rgbm_formula")
    zs = vanilla_intermediates(s, K, tau, r, sigma, b)
    th = zs.theta
    _require_theta(th)
    vol = sigma * math.sqrt(tau)
    disc_k = K * math.exp(-r * tau)
    N = norm_cdf
    value = (
        s * N(zs.z1)
        - disc_k * N(zs.z1 - vol)
        + (s * _pow(b / s, 1.0 + th) * N(zs.z3) - disc_k * _pow(K / b, th - 1.0) * N(zs.z3 - th * vol)) / th
    )
    return PriceQuote(float(value), "rgbm_formula", zs)


def rgbm_put(spec: OptionSpec, s: float, params: ModelParams) -> PriceQuote:
    """Reflected-GBM European put price in closed form."""
    _check_rgbm_inputs(spec, OptionKind.PUT, s, params)
    tau, K, b, r, sigma = spec.tau, spec.strike, params.b, params.r, params.sigma
    if tau == 0.0:
        return PriceQuote(max(K - s, 0.0), "rgbm_formula")
    zs = vanilla_intermediates(s, K, tau, r, sigma, b)
    th = zs.theta
    _require_theta(th)
    vol = sigma * math.sqrt(tau)
    disc = math.exp(-r * tau)
    N = norm_cdf
    z1, z3, z4 = zs.z1, zs.z3, zs.z4
    correction = (
        s * _pow(b / s, 1.0 + th) * (N(z4 + th * vol) - N(z3))
        - b * disc * N(z4)
        + K * disc * _pow(K / b, th - 1.0) * N(z3 - th * vol)
    )
    value = (
        K * disc * N(-z1 + vol)
        - b * disc * N(z4)
        - s * (N(-z4 + vol) - N(z1))
        - correction / th
    )
    return PriceQuote(float(value), "rgbm_formula", zs)


def rgbm_nneg(spec: OptionSpec, s: float, params: ModelParams) -> PriceQuote:
    """Reflected-GBM no-negative-equity guarantee price with deferment rate ``q``."""
    _check_rgbm_inputs(spec, OptionKind.NNEG, s, params)
    tau, K, b, r, q, sigma = spec.tau, spec.strike, params.b, params.r, params.q, params.sigma
    if tau == 0.0:
        return PriceQuote(max(K - s, 0.0), "rgbm_formula")
    zs = nneg_intermediates(s, K, tau, r, q, sigma, b)
    th = zs.theta
    _require_theta(th)
    vol = sigma * math.sqrt(tau)
    disc = math.exp(-r * tau)
    defer = math.exp(-q * tau)
    N = norm_cdf
    z1, z2, z3, z4 = zs.z1, zs.z2, zs.z3, zs.z4
    correction = (
        b * disc * N(-z3 + vol)
        - s * defer * _pow(b / s, 1.0 + th) * (N(z4) - N(z2))
        - K * disc * _pow(K / b, th - 1.0) * N(z2 - th * vol)
    )
    value = (
        K * disc * N(-z1 + vol)
        - s * defer * N(-z1)
        - b * disc * N(-z3 + vol)
        + s * defer * N(-z3)
        + correction / th
    )
    return PriceQuote(float(value), "rgbm_formula", zs)


def _lognormal_prices(s: float, K: float, tau: float, r: float, q: float, sigma: float):
    if not (math.isfinite(s) and s > 0):
        raise PricingError("nonpositive_spot", f"s={s}")
    if not sigma > 0:
        raise PricingError("sigma_nonpositive", f"sigma={sigma}")
    fwd_s = s * math.exp(-q * tau)
    disc_k = K * math.exp(-r * tau)
    if tau == 0.0:
        return max(s - K, 0.0), max(K - s, 0.0)
    if K == 0.0:
        return fwd_s, 0.0
    vol = sigma * math.sqrt(tau)
    d1 = (math.log(s / K) + (r - q + 0.5 * sigma * sigma) * tau) / vol
    d2 = d1 - vol
    call = fwd_s * norm_cdf(d1) - disc_k * norm_cdf(d2)
    put = disc_k * norm_cdf(-d2) - fwd_s * norm_cdf(-d1)
    return float(call), float(put)


def bs_call(spec: OptionSpec, s: float, r: float, sigma: float) -> PriceQuote:
    return PriceQuote(_lognormal_prices(s, spec.strike, spec.tau, r, 0.0, sigma)[0], "black_scholes")


def bs_put(spec: OptionSpec, s: float, r: float, sigma: float) -> PriceQuote:
    return PriceQuote(_lognormal_prices(s, spec.strike, spec.tau, r, 0.0, sigma)[1], "black_scholes")


def black76_put(spec: OptionSpec, s: float, r: float, q: float, sigma: float) -> PriceQuote:
    """Black (1976) put on the deferment price ``s * exp(-q tau)``."""
    return PriceQuote(_lognormal_prices(s, spec.strike, spec.tau, r, q, sigma)[1], "black76")


def mc_price(
    spec: OptionSpec,
    s: float,
    params: ModelParams,
    n_paths: int,
    grid: Optional[TimeGrid] = None,
    seed: int = 0,
    *,
    scheme: str = "exact",
    threads: int = 1,
) -> MCEstimate:
    """Discounted payoff average over reflected paths started at ``s``.

    Paths drift at ``r`` for calls and puts and at ``r - q`` for the NNEG, and
    reflect at ``b``. This is the dynamics the closed-form prices implicitly
    assume; agreement or disagreement with them is an empirical finding.
    ``scheme="euler"`` uses the projected Euler scheme on ``grid``;
    ``scheme="exact"`` samples each grid step exactly in law, so one step
    suffices for European payoffs.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    tau = spec.tau
    if tau == 0.0:
        return MCEstimate(spec.payoff(s), 0.0, n_paths, int(seed), scheme, 0.0)
    if grid is None:
        if scheme != "exact":
            raise ValueError("the euler scheme needs an explicit grid")
        grid = TimeGrid(spec.valuation_time, spec.maturity, 1)
    if abs((grid.horizon - grid.t0) - tau) > 1e-12 * max(1.0, tau):
        raise ValueError(f"grid spans {grid.horizon - grid.t0}, option has tau={tau}")
    drift = params.r - params.q if spec.kind is OptionKind.NNEG else params.r
    sim_params = validate_params(params.replace(s0=float(s)))
    terminal = terminal_values(sim_params, grid, n_paths, seed, scheme=scheme, drift=drift, threads=threads)
    if spec.kind is OptionKind.CALL:
        pay = np.maximum(terminal - spec.strike, 0.0)
    else:
        pay = np.maximum(spec.strike - terminal, 0.0)
    pay *= math.exp(-params.r * tau)
    mean = math.fsum(pay) / n_paths
    var = math.fsum((pay - mean) ** 2) / (n_paths - 1)
    return MCEstimate(mean, math.sqrt(var / n_paths), n_paths, int(seed), scheme, grid.dt)
