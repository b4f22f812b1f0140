"""Tabulated data behind the four figures (no plotting)."""

from __future__ import annotations

import csv

import numpy as np

from .arbitrage import run_reflection_arbitrage
from .bounds import check_call_upper, check_nneg_lower, check_put_lower, nneg_asymptote
from .core import ModelParams, OptionKind, OptionSpec, theta_exponent
from .pricing import black76_put, bs_call, bs_put, rgbm_call, rgbm_nneg, rgbm_put
from .simulate import TimeGrid, simulate_rgbm_path

FIGURE1 = ModelParams(mu=0.0, sigma=0.5, b=1.0, r=0.0, q=0.0, s0=2.0)
FIGURE2 = ModelParams(mu=0.125, sigma=0.5, b=1.0, r=0.125, s0=1.0)
FIGURE3 = ModelParams(mu=0.02, sigma=0.2, b=1.0, r=0.02, s0=1.0)
FIGURE4 = ModelParams(mu=0.0, sigma=0.3, b=0.5, r=0.0, q=0.03, s0=1.0)
FIGURE_PARAMS = {1: FIGURE1, 2: FIGURE2, 3: FIGURE3, 4: FIGURE4}
FIGURE_STRIKE = {2: 2.0, 3: 2.0, 4: 0.9}
FIGURE_TAU = {2: 10.0, 3: 10.0}


def figure1_table(params=FIGURE1, horizon=10.0, n_steps=100_000, seed=1):
    grid = TimeGrid(0.0, horizon, n_steps)
    path = simulate_rgbm_path(params, grid, seed)
    traj = run_reflection_arbitrage(params, grid, seed)
    cols = ["time", "s", "l", "position"]
    return cols, list(zip(path.times, path.s, path.l, traj.position))


def vanilla_table(fig, params=None, strike=None, tau=None, points=500, s_max_factor=5.0):
    """Figure 2 (call) or figure 3 (put) against the stock price on [b, 5b]."""
    params = params or FIGURE_PARAMS[fig]
    strike = FIGURE_STRIKE[fig] if strike is None else strike
    tau = FIGURE_TAU[fig] if tau is None else tau
    spec = OptionSpec(OptionKind.CALL if fig == 2 else OptionKind.PUT, strike, tau)
    rows = []
    for s in np.linspace(params.b, s_max_factor * params.b, points):
        s = float(s)
        if fig == 2:
            rg = rgbm_call(spec, s, params).value
            bs = bs_call(spec, s, params.r, params.sigma).value
            bound = check_call_upper(rg, s).bound_value
        else:
            rg = rgbm_put(spec, s, params).value
            bs = bs_put(spec, s, params.r, params.sigma).value
            bound = check_put_lower(rg, s, strike, params.r, tau).bound_value
        rows.append((s, rg, bs, bound))
    return ["s", "rgbm", "bs", "bound"], rows


def nneg_table(params=FIGURE4, strike=None, s=None, points=400, t_max=40.0):
    """Figure 4: NNEG prices against time to expiry on (0, t_max]."""
    strike = FIGURE_STRIKE[4] if strike is None else strike
    s = params.s0 if s is None else s
    asym = nneg_asymptote(strike, params.b, theta_exponent(params.r, params.q, params.sigma))
    rows = []
    for k in range(1, points + 1):
        tau = t_max * k / points
        spec = OptionSpec(OptionKind.NNEG, strike, tau)
        rg = rgbm_nneg(spec, s, params).value
        b76 = black76_put(spec, s, params.r, params.q, params.sigma).value
        bound = check_nneg_lower(rg, s, strike, params.r, params.q, tau).bound_value
        rows.append((tau, rg, b76, bound, asym))
    return ["T", "rgbm", "black76", "bound", "asymptote"], rows


def write_table(cols, rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([repr(float(x)) if not isinstance(x, (int, np.integer)) else int(x) for x in row])
