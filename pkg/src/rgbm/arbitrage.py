"""Increasing-profit strategies and the drift/quadratic-variation diagnostic."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .core import ModelParams, validate_params
from .simulate import TimeGrid, _increment, simulate_rgbm_path

__all__ = [
    "PortfolioTrajectory",
    "CharacteristicsSpec",
    "DiagnosticsReport",
    "run_reflection_arbitrage",
    "run_two_rate_increasing_profit",
    "two_rate_closed_form",
    "structure_condition_diagnostic",
    "write_trajectory_csv",
]


@dataclass
class PortfolioTrajectory:
    times: np.ndarray
    value: np.ndarray
    position: np.ndarray
    seed: int
    reflection_term: Optional[np.ndarray] = None

    def is_non_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.value) >= 0.0))

    def audit(self) -> dict:
        """Per-path increasing-profit checks used by the CLI and the tests."""
        first = None
        zero_before = True
        if self.reflection_term is not None:
            moved = np.flatnonzero(np.diff(self.reflection_term) > 0)
            if moved.size:
                first = int(moved[0]) + 1
                zero_before = bool(np.all(self.value[:first] == 0.0))
            else:
                zero_before = bool(np.all(self.value == 0.0))
        return {
            "seed": self.seed,
            "terminal_value": float(self.value[-1]),
            "non_decreasing": self.is_non_decreasing(),
            "first_reflection_step": first,
            "zero_before_first_reflection": zero_before,
        }


def run_reflection_arbitrage(params: ModelParams, grid: TimeGrid, seed: int, **path_kwargs) -> PortfolioTrajectory:
    """Hold one share exactly while the price sits on the boundary.

    Starting from zero wealth, each projection step realises the reflection
    increment as profit, which is then banked at rate ``r``:
    ``value[i+1] = value[i] * exp(r dt) + dL_i``. Multiplying a non-negative
    float by a factor >= 1 and adding a non-negative float are both monotone
    under round-to-nearest, so the value is non-decreasing exactly.
    """
    path = simulate_rgbm_path(params, grid, seed, **path_kwargs)
    growth = math.exp(params.r * grid.dt)
    dl = np.diff(path.l)
    value = np.empty_like(path.l)
    value[0] = 0.0
    if params.r == 0.0:
        # identical float operations to the accumulation of l
        value[:] = path.l
    else:
        v = 0.0
        for i, inc in enumerate(dl):
            v = v * growth + inc
            value[i + 1] = v
    position = (path.s == params.b).astype(np.int8)
    return PortfolioTrajectory(path.times, value, position, int(seed), path.l)


@dataclass(frozen=True)
class CharacteristicsSpec:
    """Piecewise-constant characteristics on ``[breakpoints[k], breakpoints[k+1])``.

    ``rho``, ``drift_b``, ``vol_a`` and ``clock_density`` (dG/dt) each hold one
    value per interval.
    """

    breakpoints: Sequence[float]
    rho: Sequence[float]
    drift_b: Sequence[float]
    vol_a: Sequence[float]
    clock_density: Sequence[float]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        m = len(bp) - 1
        if m < 1 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing with at least two entries")
        for name in ("rho", "drift_b", "vol_a", "clock_density"):
            if len(getattr(self, name)) != m:
                raise ValueError(f"{name} needs {m} values")
        if np.any(np.asarray(self.clock_density) < 0):
            raise ValueError("clock density must be non-negative")

    @property
    def horizon(self) -> float:
        return float(self.breakpoints[-1])

    def harvest_rate(self) -> np.ndarray:
        """Per-interval rate 1{a=0, b!=rho} |b - rho| dG/dt."""
        a = np.asarray(self.vol_a, dtype=float)
        gap = np.asarray(self.drift_b, dtype=float) - np.asarray(self.rho, dtype=float)
        active = (a == 0.0) & (gap != 0.0)
        return np.where(active, np.abs(gap), 0.0) * np.asarray(self.clock_density, dtype=float)

    def harvest_integral(self, t) -> np.ndarray:
        """Integral of :meth:`harvest_rate` from the first breakpoint to ``t``."""
        bp = np.asarray(self.breakpoints, dtype=float)
        rate = self.harvest_rate()
        t = np.asarray(t, dtype=float)
        lengths = np.clip(t[..., None] - bp[:-1], 0.0, np.diff(bp))
        return lengths @ rate


def two_rate_closed_form(spec: CharacteristicsSpec, r: float, t) -> np.ndarray:
    """exp(r t) * (exp(harvest integral up to t) - 1)."""
    t = np.asarray(t, dtype=float)
    return np.exp(r * t) * np.expm1(spec.harvest_integral(t))


def run_two_rate_increasing_profit(spec: CharacteristicsSpec, r: float, n_steps: int = 1000) -> PortfolioTrajectory:
    """Borrow at the lower rate and invest at the higher one while the market is riskless.

    Integrates ``dV1 = r V1 dt + 1{a=0, b!=rho}|b-rho| V1 dG`` from ``V1_0 = 1``
    step by step and reports ``V1 - B``, the zero-endowment portfolio that is
    long the strategy and short the bank account. ``position`` is the signed
    fraction of ``V1`` held in the stock, ``1{a=0}(1{b>rho} - 1{b<rho})``.
    """
    t0 = float(spec.breakpoints[0])
    times = np.linspace(t0, spec.horizon, n_steps + 1)
    h = spec.harvest_integral(times)
    # excess = V1/B - 1, stepped as excess' = (1 + excess) * expm1(dh) + excess
    excess = np.empty(n_steps + 1)
    excess[0] = 0.0
    for i in range(n_steps):
        excess[i + 1] = excess[i] + (1.0 + excess[i]) * math.expm1(h[i + 1] - h[i])
    value = np.exp(r * (times - t0)) * excess
    bp = np.asarray(spec.breakpoints, dtype=float)
    idx = np.clip(np.searchsorted(bp, times, side="right") - 1, 0, len(bp) - 2)
    a = np.asarray(spec.vol_a, dtype=float)[idx]
    gap = (np.asarray(spec.drift_b, dtype=float) - np.asarray(spec.rho, dtype=float))[idx]
    position = np.where(a == 0.0, np.sign(gap), 0.0)
    return PortfolioTrajectory(times, value, position, seed=0)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Path-averaged masses of the discounted drift and quadratic-variation measures.

    Reflection masses are taken over projection steps, interior masses over
    all other steps.
    """

    a_hat_interior_mass: float
    a_hat_reflection_mass: float
    qv_interior_mass: float
    qv_reflection_mass: float
    mean_reflection_term: float
    mean_reflection_steps: float
    dt_used: float
    n_paths: int

    @property
    def qv_to_drift_ratio(self) -> float:
        if self.a_hat_reflection_mass == 0.0:
            return math.nan
        return self.qv_reflection_mass / self.a_hat_reflection_mass

    def to_dict(self) -> dict:
        return asdict(self)


@nb.njit(cache=True, nogil=True)
def _diagnostic_kernel(s0, mu, sigma, b, r, dt, n, seed, path, refine):
    sqrt_h = math.sqrt(dt / refine)
    s = s0
    l = 0.0
    a_int = 0.0
    a_ref = 0.0
    qv_int = 0.0
    qv_ref = 0.0
    n_ref = 0
    for i in range(n):
        disc_left = math.exp(-r * i * dt)
        disc_right = math.exp(-r * (i + 1) * dt)
        y = s * (1.0 + mu * dt + sigma * _increment(seed, path, i, refine, sqrt_h))
        if y < b:
            dl = b - y
            l += dl
            a_ref += disc_right * dl
            qv_ref += sigma * sigma * (b * disc_right) ** 2 * dt
            n_ref += 1
            s = b
        else:
            a_int += (mu - r) * s * disc_left * dt
            qv_int += sigma * sigma * (s * disc_left) ** 2 * dt
            s = y
    return a_int, a_ref, qv_int, qv_ref, l, n_ref


def structure_condition_diagnostic(
    params: ModelParams,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    noise_refinement: int = 1,
) -> DiagnosticsReport:
    """Split the measures dA_hat and d<M_hat> into reflection and interior parts.

    On a projection step the drift measure picks up ``exp(-r t) dL`` while the
    quadratic-variation measure picks up only ``sigma^2 (b/B_t)^2 dt``. Paths
    ``0..n_paths-1`` of ``seed`` are used; pass ``noise_refinement`` to run
    several step sizes on a common Brownian path.
    """
    validate_params(params)
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    rows = np.array([
        _diagnostic_kernel(float(params.s0), float(params.mu), float(params.sigma), float(params.b),
                           float(params.r), grid.dt, grid.n_steps, int(seed), k, int(noise_refinement))
        for k in range(n_paths)
    ])
    mean = [math.fsum(col) / n_paths for col in rows.T]
    return DiagnosticsReport(
        a_hat_interior_mass=mean[0],
        a_hat_reflection_mass=mean[1],
        qv_interior_mass=mean[2],
        qv_reflection_mass=mean[3],
        mean_reflection_term=mean[4],
        mean_reflection_steps=mean[5],
        dt_used=grid.dt,
        n_paths=n_paths,
    )


def write_trajectory_csv(traj: PortfolioTrajectory, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["time", "value", "position"])
    for t, v, p in zip(traj.times, traj.value, traj.position):
        w.writerow([repr(float(t)), repr(float(v)), repr(float(p)) if p % 1 else int(p)])
