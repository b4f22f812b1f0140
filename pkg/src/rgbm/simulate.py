"""Reflected and plain GBM path generation.

The reflected scheme is Euler-Maruyama followed by a projection onto
``[b, inf)``:

    Y      = s[i] * (1 + mu*dt + sigma*dW)
    dL     = max(0, b - Y)
    s[i+1] = max(Y, b)
    l[i+1] = l[i] + dL

The reflection term is additive in price units, as in the SDE
``dS = mu S dt + sigma S dW + dL``. Brownian increments come from
:mod:`rgbm.rng`, keyed by ``(seed, path_index, fine_step)``. With
``noise_refinement=m`` each increment is the sum of ``m`` fine-grid normals,
so a grid with step ``dt`` and refinement ``m`` sees exactly the Brownian
path that a grid with step ``dt/m`` and refinement 1 sees.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numba as nb
import numpy as np

from .core import ModelParams, ParamError, validate_params
from .rng import normal, uniform

__all__ = [
    "TimeGrid",
    "PathSample",
    "LocalTimeEstimate",
    "simulate_rgbm_path",
    "simulate_gbm_path",
    "terminal_values",
    "local_time_occupation_estimate",
    "first_passage_time",
    "write_path_csv",
    "read_path_csv",
    "run_blocks",
]

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    horizon: float
    n_steps: int

    def __post_init__(self):
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise ParamError("bad_grid", f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.horizon)) or self.horizon <= self.t0:
            raise ParamError("bad_grid", f"need horizon > t0, got t0={self.t0}, horizon={self.horizon}")

    @property
    def dt(self) -> float:
        return (self.horizon - self.t0) / self.n_steps

    def times(self) -> np.ndarray:
        t = self.t0 + self.dt * np.arange(self.n_steps + 1)
        t[-1] = self.horizon
        return t


@dataclass
class PathSample:
    times: np.ndarray
    s: np.ndarray
    l: np.ndarray
    reflected: np.ndarray
    seed: int
    path_index: int = 0

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class LocalTimeEstimate:
    epsilon: float
    value: float


@nb.njit(cache=True, nogil=True)
def _increment(seed, path, i, refine, sqrt_h):
    dw = 0.0
    for j in range(refine):
        dw += normal(seed, path, i * refine + j)
    return dw * sqrt_h


@nb.njit(cache=True, nogil=True)
def _rgbm_kernel(s0, mu, sigma, b, dt, seed, path, refine, noise_scale, s_out, l_out, ref_out):
    sqrt_h = math.sqrt(dt / refine) * noise_scale
    s = s0
    l = 0.0
    s_out[0] = s
    l_out[0] = 0.0
    ref_out[0] = False
    for i in range(s_out.shape[0] - 1):
        y = s * (1.0 + mu * dt + sigma * _increment(seed, path, i, refine, sqrt_h))
        if y < b:
            l += b - y
            s = b
            ref_out[i + 1] = True
        else:
            s = y
            ref_out[i + 1] = False
        s_out[i + 1] = s
        l_out[i + 1] = l


@nb.njit(cache=True, nogil=True)
def _gbm_kernel(s0, mu, sigma, dt, seed, path, refine, noise_scale, s_out):
    sqrt_h = math.sqrt(dt / refine) * noise_scale
    drift = (mu - 0.5 * sigma * sigma) * dt
    s = s0
    s_out[0] = s
    for i in range(s_out.shape[0] - 1):
        s = s * math.exp(drift + sigma * _increment(seed, path, i, refine, sqrt_h))
        s_out[i + 1] = s


@nb.njit(cache=True, nogil=True)
def _terminal_euler(s0, mu, sigma, b, dt, n, seed, start, refine, out):
    sqrt_h = math.sqrt(dt / refine)
    for k in range(out.shape[0]):
        path = start + k
        s = s0
        for i in range(n):
            s = s * (1.0 + mu * dt + sigma * _increment(seed, path, i, refine, sqrt_h))
            if s < b:
                s = b
        out[k] = s


@nb.njit(cache=True, nogil=True)
def _terminal_gbm(s0, mu, sigma, dt, n, seed, start, refine, out):
    sqrt_h = math.sqrt(dt / refine)
    drift = (mu - 0.5 * sigma * sigma) * dt
    for k in range(out.shape[0]):
        path = start + k
        x = math.log(s0)
        for i in range(n):
            x += drift + sigma * _increment(seed, path, i, refine, sqrt_h)
        out[k] = math.exp(x)


@nb.njit(cache=True, nogil=True)
def _terminal_exact(s0, mu, sigma, b, dt, n, seed, start, out):
    # log-price is Brownian motion with drift reflected at log(b); each step
    # applies the Skorokhod map using the exact law of the bridge minimum
    nu = (mu - 0.5 * sigma * sigma) * dt
    vol = sigma * math.sqrt(dt)
    var2 = 2.0 * sigma * sigma * dt
    lb = math.log(b)
    for k in range(out.shape[0]):
        path = start + k
        x = math.log(s0)
        for i in range(n):
            y = x + nu + vol * normal(seed, path, i)
            d = y - x
            m = 0.5 * (x + y - math.sqrt(d * d - var2 * math.log(uniform(seed, path, i))))
            if m < lb:
                y += lb - m
            x = y
        out[k] = math.exp(x)


def run_blocks(task: Callable[[int, int], None], n_paths: int, threads: int = 1) -> None:
    """Call ``task(start, stop)`` over fixed blocks of path indices.

    Block boundaries do not depend on ``threads``; tasks write into disjoint
    slices of preallocated outputs, so results are identical for any worker
    count.
    """
    spans = [(a, min(a + BLOCK_SIZE, n_paths)) for a in range(0, n_paths, BLOCK_SIZE)]
    if threads <= 1 or len(spans) == 1:
        for a, z in spans:
            task(a, z)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for f in [pool.submit(task, a, z) for a, z in spans]:
            f.result()


def simulate_rgbm_path(
    params: ModelParams,
    grid: TimeGrid,
    seed: int,
    *,
    path_index: int = 0,
    noise_refinement: int = 1,
    noise_scale: float = 1.0,
) -> PathSample:
    """One reflected path on ``grid``.

    ``noise_scale`` multiplies every Brownian increment. Setting it to 0 is a
    test hook that makes the path deterministic.
    """
    validate_params(params)
    n = grid.n_steps
    s = np.empty(n + 1)
    l = np.empty(n + 1)
    ref = np.empty(n + 1, dtype=np.bool_)
    _rgbm_kernel(float(params.s0), float(params.mu), float(params.sigma), float(params.b),
                 grid.dt, int(seed), int(path_index), int(noise_refinement),
                 float(noise_scale), s, l, ref)
    return PathSample(grid.times(), s, l, ref, int(seed), int(path_index))


def simulate_gbm_path(
    params: ModelParams,
    grid: TimeGrid,
    seed: int,
    *,
    path_index: int = 0,
    noise_refinement: int = 1,
    noise_scale: float = 1.0,
) -> PathSample:
    """Plain GBM via the exact log-normal update; the boundary is ignored."""
    validate_params(params)
    n = grid.n_steps
    s = np.empty(n + 1)
    _gbm_kernel(float(params.s0), float(params.mu), float(params.sigma), grid.dt,
                int(seed), int(path_index), int(noise_refinement), float(noise_scale), s)
    return PathSample(grid.times(), s, np.zeros(n + 1), np.zeros(n + 1, dtype=np.bool_),
                      int(seed), int(path_index))


def terminal_values(
    params: ModelParams,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    scheme: str = "euler",
    drift: Optional[float] = None,
    noise_refinement: int = 1,
    threads: int = 1,
) -> np.ndarray:
    """Terminal prices of paths ``0..n_paths-1`` under one seed.

    Schemes:
      ``euler``  reflected Euler with projection (same as simulate_rgbm_path)
      ``exact``  reflected, exact in law on any grid (log-space Skorokhod map)
      ``gbm``    unreflected exact log-normal steps
    ``drift`` overrides ``params.mu``.
    """
    validate_params(params)
    mu = float(params.mu if drift is None else drift)
    s0, sigma, b = float(params.s0), float(params.sigma), float(params.b)
    dt, n = grid.dt, grid.n_steps
    seed = int(seed)
    out = np.empty(n_paths)

    if scheme == "euler":
        def task(a, z):
            _terminal_euler(s0, mu, sigma, b, dt, n, seed, a, noise_refinement, out[a:z])
    elif scheme == "exact":
        if noise_refinement != 1:
            raise ValueError("the exact scheme has no noise refinement")

        def task(a, z):
            _terminal_exact(s0, mu, sigma, b, dt, n, seed, a, out[a:z])
    elif scheme == "gbm":
        def task(a, z):
            _terminal_gbm(s0, mu, sigma, dt, n, seed, a, noise_refinement, out[a:z])
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    run_blocks(task, n_paths, threads)
    return out


def local_time_occupation_estimate(path: PathSample, params: ModelParams, epsilon: float) -> LocalTimeEstimate:
    """Occupation-density estimate of the local time at ``b`` up to the path end.

    (1/eps) * sum_i 1{b < s_i <= b+eps} sigma^2 s_i^2 dt over left endpoints.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    b = params.b
    s = path.s[:-1]
    dt = np.diff(path.times)
    band = (s > b) & (s <= b + epsilon)
    value = math.fsum(params.sigma ** 2 * s[band] ** 2 * dt[band]) / epsilon
    return LocalTimeEstimate(float(epsilon), value)


def first_passage_time(path: PathSample, level: float) -> Optional[float]:
    hits = np.flatnonzero(path.s <= level)
    if hits.size == 0:
        return None
    return float(path.times[hits[0]])


def write_path_csv(path: PathSample, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["time", "s", "l", "reflected"])
    for t, s, l, f in zip(path.times, path.s, path.l, path.reflected):
        w.writerow([repr(float(t)), repr(float(s)), repr(float(l)), int(f)])


def read_path_csv(fh, seed: int = 0) -> PathSample:
    rows = list(csv.DictReader(fh))
    return PathSample(
        np.array([float(r["time"]) for r in rows]),
        np.array([float(r["s"]) for r in rows]),
        np.array([float(r["l"]) for r in rows]),
        np.array([r["reflected"] == "1" for r in rows], dtype=np.bool_),
        seed,
    )
