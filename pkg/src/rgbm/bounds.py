"""Model-independent price bounds and violation searches."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from .core import ModelParams, OptionKind, OptionSpec, ParamError, PricingError
from .pricing import rgbm_call, rgbm_nneg, rgbm_put

__all__ = [
    "TOLERANCE",
    "BoundVerdict",
    "SweepResult",
    "FIGURE_BASES",
    "check_call_upper",
    "check_put_lower",
    "check_nneg_lower",
    "nneg_asymptote",
    "evaluate_cell",
    "violation_sweep",
    "crossing_maturity",
    "violation_extent",
]

TOLERANCE = 1e-12

# default base point per sweep target; s is the stock (or house) price at valuation
FIGURE_BASES = {
    "prop33": {"s": 1.0, "strike": 2.0, "tau": 10.0, "r": 0.125, "q": 0.0, "sigma": 0.5, "b": 1.0},
    "prop34": {"s": 1.0, "strike": 2.0, "tau": 10.0, "r": 0.02, "q": 0.0, "sigma": 0.2, "b": 1.0},
    "prop35": {"s": 1.0, "strike": 0.9, "tau": 20.0, "r": 0.0, "q": 0.03, "sigma": 0.3, "b": 0.5},
}
_KINDS = {"prop33": OptionKind.CALL, "prop34": OptionKind.PUT, "prop35": OptionKind.NNEG}


@dataclass(frozen=True)
class BoundVerdict:
    """``margin`` is positive when the price is on the wrong side of the bound."""

    bound_value: float
    price: float
    violated: bool
    margin: float
    side: str

    def to_dict(self) -> dict:
        return {"side": self.side, "bound": self.bound_value, "price": self.price,
                "margin": self.margin, "violated": self.violated}


def _verdict(bound: float, price: float, margin: float, side: str) -> BoundVerdict:
    return BoundVerdict(float(bound), float(price), bool(margin > TOLERANCE), float(margin), side)


def check_call_upper(price: float, s: float) -> BoundVerdict:
    """Call price must not exceed the stock price."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return _verdict(s, price, price - s, "upper")


def check_put_lower(price: float, s: float, K: float, r: float, tau: float) -> BoundVerdict:
    """Put price must be at least K exp(-r tau) - s."""
    bound = K * math.exp(-r * tau) - s
    return _verdict(bound, price, bound - price, "lower")


def check_nneg_lower(price: float, s: float, K: float, r: float, q: float, tau: float) -> BoundVerdict:
    """NNEG price must be at least K exp(-r tau) - s exp(-q tau)."""
    bound = K * math.exp(-r * tau) - s * math.exp(-q * tau)
    return _verdict(bound, price, bound - price, "lower")


def nneg_asymptote(K: float, b: float, theta: float) -> float:
    """Long-maturity limit of the reflected-GBM NNEG price when -1 < theta < 0."""
    if theta == 0.0:
        raise PricingError("theta_zero_unsupported", "asymptote has a 1/theta factor")
    if not (K >= b > 0):
        raise PricingError("strike_below_boundary", f"need K >= b > 0, got K={K}, b={b}")
    # K + (b/theta)(1 - theta - (K/b)^theta), grouped so that K = b gives exactly 0
    return (K - b) + (b / theta) * (1.0 - (K / b) ** theta)


def evaluate_cell(target: str, values: Mapping[str, float]) -> BoundVerdict:
    """Price one parameter point with the target's formula and check its bound."""
    kind = _KINDS[target]
    v = values
    params = ModelParams(mu=v["r"], sigma=v["sigma"], b=v["b"], r=v["r"], q=v.get("q", 0.0), s0=v["s"])
    spec = OptionSpec(kind, v["strike"], v["tau"])
    if kind is OptionKind.CALL:
        return check_call_upper(rgbm_call(spec, v["s"], params).value, v["s"])
    if kind is OptionKind.PUT:
        return check_put_lower(rgbm_put(spec, v["s"], params).value, v["s"], v["strike"], v["r"], v["tau"])
    return check_nneg_lower(rgbm_nneg(spec, v["s"], params).value, v["s"], v["strike"], v["r"], v["q"], v["tau"])


@dataclass
class SweepResult:
    target: str
    axes: dict
    price: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    status: np.ndarray  # "violated" | "ok" | "undefined"
    errors: dict = field(default_factory=dict)
    first_violation: Optional[dict] = None
    certificate: dict = field(default_factory=dict)

    @property
    def violated(self) -> np.ndarray:
        return self.status == "violated"

    def cells(self):
        names = list(self.axes)
        for idx in itertools.product(*(range(len(a)) for a in self.axes.values())):
            yield idx, {n: float(self.axes[n][i]) for n, i in zip(names, idx)}

    def to_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*self.axes, "price", "bound", "margin", "violated"])
        for idx, coords in self.cells():
            st = self.status[idx]
            flag = "undefined" if st == "undefined" else ("true" if st == "violated" else "false")
            w.writerow([*(repr(c) for c in coords.values()), repr(float(self.price[idx])),
                        repr(float(self.bound[idx])), repr(float(self.margin[idx])), flag])

    def summary(self) -> dict:
        return {
            "target": self.target,
            "axes": {k: [float(x) for x in v] for k, v in self.axes.items()},
            "n_cells": int(self.status.size),
            "n_violated": int(np.count_nonzero(self.status == "violated")),
            "n_undefined": int(np.count_nonzero(self.status == "undefined")),
            "first_violation": self.first_violation,
            "certificate": self.certificate,
        }


def _cell_values(target: str, base: Mapping[str, float], coords: Mapping[str, float], theta_one: bool) -> dict:
    values = {**base, **coords}
    if theta_one and target in ("prop33", "prop34") and "sigma" not in coords:
        values["sigma"] = math.sqrt(2.0 * values["r"])
    return values


def violation_sweep(
    target: str,
    axes: Mapping[str, Sequence[float]],
    base: Optional[Mapping[str, float]] = None,
    *,
    theta_one: bool = True,
) -> SweepResult:
    """Evaluate the target formula and its bound on the Cartesian grid ``axes``.

    ``base`` fills in every quantity not swept (defaults: the figure
    parameter set of the target). For the call and put targets ``sigma`` is tied to
    ``sqrt(2 r)`` in every cell unless it is swept or ``theta_one`` is False.
    Cells where pricing raises are marked undefined and keep the error code.
    """
    if target not in _KINDS:
        raise ValueError(f"unknown target {target!r}")
    if not axes or any(len(v) == 0 for v in axes.values()):
        raise ValueError("every axis needs at least one value")
    base = {**FIGURE_BASES[target], **(base or {})}
    unknown = set(axes) - set(base)
    if unknown:
        raise ValueError(f"unknown axis names {sorted(unknown)}")
    axes = {k: np.asarray(v, dtype=float) for k, v in axes.items()}
    shape = tuple(len(v) for v in axes.values())
    price = np.full(shape, np.nan)
    bound = np.full(shape, np.nan)
    margin = np.full(shape, np.nan)
    status = np.full(shape, "undefined", dtype=object)
    result = SweepResult(target, axes, price, bound, margin, status)

    for idx, coords in result.cells():
        try:
            v = evaluate_cell(target, _cell_values(target, base, coords, theta_one))
        except (PricingError, ParamError) as exc:
            result.errors[idx] = exc.code
            continue
        price[idx], bound[idx], margin[idx] = v.price, v.bound_value, v.margin
        status[idx] = "violated" if v.violated else "ok"
        if v.violated and result.first_violation is None:
            result.first_violation = dict(coords)

    result.certificate = _certificate(result, base, theta_one)
    return result


def _certificate(result: SweepResult, base, theta_one: bool) -> dict:
    target = result.target
    cert: dict = {"violating_points": [c for idx, c in result.cells() if result.status[idx] == "violated"]}
    threshold_axis = {"prop34": "strike", "prop35": "tau"}.get(target)
    if threshold_axis in result.axes:
        cert["thresholds"] = _thresholds(result, threshold_axis, base, theta_one)
    return cert


def _thresholds(result: SweepResult, axis: str, base, theta_one: bool) -> list:
    """For each setting of the other axes, where the trailing violated run starts."""
    names = list(result.axes)
    k = names.index(axis)
    values = result.axes[axis]
    others = [n for n in names if n != axis]
    out = []
    for oidx in itertools.product(*(range(len(result.axes[n])) for n in others)):
        coords = {n: float(result.axes[n][i]) for n, i in zip(others, oidx)}
        column = [result.status[tuple(oidx[:k]) + (j,) + tuple(oidx[k:])] for j in range(len(values))]
        j = len(column)
        while j > 0 and column[j - 1] == "violated":
            j -= 1
        entry = {**coords, "sampled_from": None, "refined": None}
        if j < len(column):
            entry["sampled_from"] = float(values[j])
            if j > 0 and column[j - 1] == "ok":
                lo, hi = float(values[j - 1]), float(values[j])

                def f(x):
                    cell = _cell_values(result.target, base, {**coords, axis: x}, theta_one)
                    return evaluate_cell(result.target, cell).margin - TOLERANCE

                entry["refined"] = bisect(f, lo, hi, xtol=1e-3)
        out.append(entry)
    return out


def crossing_maturity(params: ModelParams, strike: float, s: float, lo: float, hi: float, xtol: float = 1e-3) -> float:
    """Maturity at which the NNEG formula crosses its lower bound, by bisection."""

    def margin(tau: float) -> float:
        spec = OptionSpec(OptionKind.NNEG, strike, tau)
        price = rgbm_nneg(spec, s, params).value
        return check_nneg_lower(price, s, strike, params.r, params.q, tau).margin - TOLERANCE

    if margin(lo) * margin(hi) > 0:
        raise ValueError(f"margin does not change sign on [{lo}, {hi}]")
    return bisect(margin, lo, hi, xtol=xtol)


def violation_extent(margin_fn: Callable[[float], float], b: float, width: float, n_scan: int = 2000) -> float:
    """Largest ``delta`` with ``margin_fn(s) > TOLERANCE`` on all of ``[b, b + delta]``.

    Scans ``[b, b + width]`` on ``n_scan`` points and refines the first sign
    change by bisection. Returns 0 if the bound holds at ``b`` itself and
    ``width`` if no sign change is found.
    """
    if not margin_fn(b) > TOLERANCE:
        return 0.0
    grid = np.linspace(b, b + width, n_scan + 1)
    prev = b
    for s in grid[1:]:
        if not margin_fn(s) > TOLERANCE:
            root = bisect(lambda x: margin_fn(x) - TOLERANCE, prev, s, xtol=1e-12)
            return float(root - b)
        prev = s
    return float(width)
