"""Command-line entry point: ``rgbm simulate | arb | price | figure | sweep``.

Settings resolve in layers: command defaults, then a figure preset (when
``--figure`` is given), then the ``--config`` JSON file, then explicit flags.
The resolved settings are written to ``config.json`` in the output directory.

Exit codes: 0 success, 2 usage or validation error, 3 pricing domain error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import figures
from .arbitrage import run_reflection_arbitrage, write_trajectory_csv
from .bounds import (
    FIGURE_BASES,
    check_call_upper,
    check_nneg_lower,
    check_put_lower,
    violation_sweep,
)
from .core import ModelParams, OptionKind, OptionSpec, ParamError, PricingError, validate_params
from .pricing import black76_put, bs_call, bs_put, mc_price, rgbm_call, rgbm_nneg, rgbm_put
from .simulate import TimeGrid, first_passage_time, simulate_rgbm_path, write_path_csv

EXIT_OK, EXIT_USAGE, EXIT_PRICING, EXIT_IO = 0, 2, 3, 4

MODEL_KEYS = ("mu", "sigma", "b", "r", "q", "s0")

DEFAULTS = {
    "common": {"out": "out", "seed": 1, "threads": 1,
               "mu": 0.0, "sigma": 0.5, "b": 1.0, "r": 0.0, "q": 0.0, "s0": 2.0},
    "simulate": {"horizon": 10.0, "steps": 100_000, "n_seeds": 1},
    "arb": {"horizon": 10.0, "steps": 100_000, "n_seeds": 100},
    "price": {"kind": "call", "strike": 2.0, "maturity": 10.0, "valuation_time": 0.0, "spot": None,
              "methods": "rgbm,bs,black76,mc", "n_paths": 100_000, "mc_steps": 1, "mc_scheme": "exact"},
    "figure": {"points": None, "horizon": 10.0, "steps": 100_000},
    "sweep": {"target": "prop33", "axes": None},
}

PRESETS = {
    1: {"mu": 0.0, "sigma": 0.5, "b": 1.0, "r": 0.0, "q": 0.0, "s0": 2.0},
    2: {"mu": 0.125, "sigma": 0.5, "b": 1.0, "r": 0.125, "q": 0.0, "s0": 1.0,
        "kind": "call", "strike": 2.0, "maturity": 10.0},
    3: {"mu": 0.02, "sigma": 0.2, "b": 1.0, "r": 0.02, "q": 0.0, "s0": 1.0,
        "kind": "put", "strike": 2.0, "maturity": 10.0},
    4: {"mu": 0.0, "sigma": 0.3, "b": 0.5, "r": 0.0, "q": 0.03, "s0": 1.0,
        "kind": "nneg", "strike": 0.9, "maturity": 20.0},
}

DEFAULT_SWEEP_AXES = {
    "prop33": {"strike": np.linspace(1.05, 3.0, 40).tolist(), "r": np.linspace(0.02, 0.3, 15).tolist()},
    "prop34": {"strike": np.linspace(1.1, 6.0, 50).tolist()},
    "prop35": {"tau": np.linspace(1.0, 40.0, 40).tolist()},
}


class UsageError(Exception):
    pass


def _parse_axis(text: str):
    name, _, spec = text.partition("=")
    if not name or not spec:
        raise argparse.ArgumentTypeError(f"axis must look like name=v1,v2 or name=start:stop:num, got {text!r}")
    try:
        if ":" in spec:
            a, z, n = spec.split(":")
            values = np.linspace(float(a), float(z), int(n)).tolist()
        else:
            values = [float(x) for x in spec.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return name, values


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", default=S, help="JSON file with settings")
    g.add_argument("--out", default=S, help="output directory")
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--threads", type=int, default=S)
    m = common.add_argument_group("model")
    for key in MODEL_KEYS:
        m.add_argument(f"--{key}", type=float, default=S)

    parser = argparse.ArgumentParser(prog="rgbm", description="Reflected GBM arbitrage and pricing audit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate reflected paths")
    p.add_argument("--horizon", type=float, default=S)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--n-seeds", dest="n_seeds", type=int, default=S)
    p.add_argument("--figure", type=int, choices=[1], default=S)

    p = sub.add_parser("arb", parents=[common], help="run the boundary-harvesting strategy over many seeds")
    p.add_argument("--horizon", type=float, default=S)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--n-seeds", dest="n_seeds", type=int, default=S)

    p = sub.add_parser("price", parents=[common], help="price one contract with every method")
    p.add_argument("--figure", type=int, choices=[2, 3, 4], default=S)
    p.add_argument("--kind", choices=[k.value for k in OptionKind], default=S)
    p.add_argument("--strike", type=float, default=S)
    p.add_argument("--maturity", type=float, default=S)
    p.add_argument("--valuation-time", dest="valuation_time", type=float, default=S)
    p.add_argument("--spot", type=float, default=S, help="price at valuation (default s0)")
    p.add_argument("--methods", default=S, help="comma list of rgbm,bs,black76,mc")
    p.add_argument("--n-paths", dest="n_paths", type=int, default=S)
    p.add_argument("--mc-steps", dest="mc_steps", type=int, default=S)
    p.add_argument("--mc-scheme", dest="mc_scheme", choices=["exact", "euler"], default=S)

    p = sub.add_parser("figure", parents=[common], help="emit the data behind a figure")
    p.add_argument("n", type=int, choices=[1, 2, 3, 4])
    p.add_argument("--points", type=int, default=S)
    p.add_argument("--horizon", type=float, default=S)
    p.add_argument("--steps", type=int, default=S)

    p = sub.add_parser("sweep", parents=[common], help="bound-violation sweep")
    p.add_argument("--target", choices=sorted(FIGURE_BASES), default=S)
    p.add_argument("--axis", dest="axis", action="append", type=_parse_axis, default=S,
                   help="name=v1,v2,... or name=start:stop:num (repeatable)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    flags = vars(args).copy()
    command = flags.pop("command")
    cfg = {**DEFAULTS["common"], **DEFAULTS[command]}
    file_cfg = {}
    if "config" in flags:
        path = flags.pop("config")
        try:
            file_cfg = json.loads(Path(path).read_text())
        except ValueError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
    figure = flags.get("figure", file_cfg.get("figure"))
    if command == "figure":
        figure = flags["n"]
    if figure is not None:
        cfg.update(PRESETS[int(figure)])
        cfg["figure"] = int(figure)
    cfg.update(file_cfg)
    if "axis" in flags:
        cfg["axes"] = dict(flags.pop("axis"))
    cfg.update(flags)
    cfg["command"] = command
    return cfg


def _params(cfg) -> ModelParams:
    return validate_params(ModelParams(**{k: float(cfg[k]) for k in MODEL_KEYS}))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _positive(cfg, key):
    if int(cfg[key]) < 1:
        raise UsageError(f"--{key.replace('_', '-')} must be at least 1, got {cfg[key]}")


def cmd_simulate(cfg, out: Path) -> dict:
    _positive(cfg, "n_seeds")
    params = _params(cfg)
    grid = TimeGrid(0.0, float(cfg["horizon"]), int(cfg["steps"]))
    seeds = [int(cfg["seed"]) + k for k in range(int(cfg["n_seeds"]))]
    per_seed = []
    for seed in seeds:
        path = simulate_rgbm_path(params, grid, seed)
        with open(out / f"path_{seed}.csv", "w", newline="") as fh:
            write_path_csv(path, fh)
        per_seed.append({"seed": seed, "l_terminal": float(path.l[-1]),
                         "first_passage_time": first_passage_time(path, params.b)})
        if cfg.get("figure") == 1 and seed == seeds[0]:
            cols, rows = figures.figure1_table(params, grid.horizon, grid.n_steps, seed)
            with open(out / "figure_1.csv", "w", newline="") as fh:
                figures.write_table(cols, rows, fh)
    summary = {
        "n_seeds": len(seeds),
        "hit_fraction": sum(p["l_terminal"] > 0 for p in per_seed) / len(seeds),
        "mean_l_terminal": math.fsum(p["l_terminal"] for p in per_seed) / len(seeds),
        "dt": grid.dt,
        "paths": per_seed,
    }
    _write_json(out / "summary.json", summary)
    return {k: summary[k] for k in ("n_seeds", "hit_fraction", "mean_l_terminal")}


def cmd_arb(cfg, out: Path) -> dict:
    _positive(cfg, "n_seeds")
    params = _params(cfg)
    grid = TimeGrid(0.0, float(cfg["horizon"]), int(cfg["steps"]))
    seeds = [int(cfg["seed"]) + k for k in range(int(cfg["n_seeds"]))]
    audits = []
    for seed in seeds:
        traj = run_reflection_arbitrage(params, grid, seed)
        if seed == seeds[0]:
            with open(out / f"trajectory_{seed}.csv", "w", newline="") as fh:
                write_trajectory_csv(traj, fh)
        a = traj.audit()
        a["value_equals_reflection_term"] = (
            bool(np.array_equal(traj.value, traj.reflection_term)) if params.r == 0.0 else None)
        audits.append(a)
    terminal = [a["terminal_value"] for a in audits]
    verdict = {
        "n_seeds": len(seeds),
        "fraction_positive": sum(v > 0 for v in terminal) / len(seeds),
        "min_terminal_value": min(terminal),
        "max_terminal_value": max(terminal),
        "all_non_decreasing": all(a["non_decreasing"] for a in audits),
        "all_zero_before_first_reflection": all(a["zero_before_first_reflection"] for a in audits),
        "value_equals_reflection_term": (all(a["value_equals_reflection_term"] for a in audits)
                                         if params.r == 0.0 else None),
        "paths": audits,
    }
    _write_json(out / "verdict.json", verdict)
    return {k: v for k, v in verdict.items() if k != "paths"}


def cmd_price(cfg, out: Path) -> dict:
    params = _params(cfg)
    spot = float(cfg["spot"]) if cfg.get("spot") is not None else params.s0
    spec = OptionSpec(OptionKind(cfg["kind"]), float(cfg["strike"]), float(cfg["maturity"]),
                      float(cfg["valuation_time"]))
    methods = [m.strip() for m in str(cfg["methods"]).split(",") if m.strip()]
    unknown = set(methods) - {"rgbm", "bs", "black76", "mc"}
    if unknown:
        raise UsageError(f"unknown methods {sorted(unknown)}")
    tau = spec.tau

    def check(value):
        if spec.kind is OptionKind.CALL:
            return check_call_upper(value, spot)
        if spec.kind is OptionKind.PUT:
            return check_put_lower(value, spot, spec.strike, params.r, tau)
        return check_nneg_lower(value, spot, spec.strike, params.r, params.q, tau)

    quotes = {}
    if "rgbm" in methods:
        fn = {OptionKind.CALL: rgbm_call, OptionKind.PUT: rgbm_put, OptionKind.NNEG: rgbm_nneg}[spec.kind]
        quotes["rgbm"] = fn(spec, spot, params)
    if "bs" in methods and spec.kind is not OptionKind.NNEG:
        fn = bs_call if spec.kind is OptionKind.CALL else bs_put
        quotes["bs"] = fn(spec, spot, params.r, params.sigma)
    if "black76" in methods and spec.kind is not OptionKind.CALL:
        quotes["black76"] = black76_put(spec, spot, params.r, params.q, params.sigma)
    if "mc" in methods:
        grid = TimeGrid(spec.valuation_time, spec.maturity, int(cfg["mc_steps"])) if tau > 0 else None
        est = mc_price(spec, spot, params, int(cfg["n_paths"]), grid, int(cfg["seed"]),
                       scheme=cfg["mc_scheme"], threads=int(cfg["threads"]))
        quotes["mc"] = est.to_quote()

    report = {"kind": spec.kind.value, "spot": spot, "strike": spec.strike, "tau": tau,
              "quotes": {}}
    for name, quote in quotes.items():
        verdict = check(quote.value)
        d = quote.to_dict()
        d["bound_status"] = verdict.to_dict()
        d["flag"] = "VIOLATES " + ("upper" if verdict.side == "upper" else "lower") + " bound" if verdict.violated else ""
        report["quotes"][name] = d
    if "rgbm" in quotes:
        rg = quotes["rgbm"].value
        bound = check(rg).bound_value
        ratios = {"rgbm_over_bound": rg / bound if bound != 0 else None}
        if "black76" in quotes:
            ratios["rgbm_over_black76"] = rg / quotes["black76"].value
        if "bs" in quotes:
            ratios["rgbm_over_bs"] = rg / quotes["bs"].value if quotes["bs"].value else None
        report["ratios"] = ratios
    _write_json(out / "price.json", report)
    return report


def cmd_figure(cfg, out: Path) -> dict:
    n = int(cfg["n"])
    params = _params(cfg)
    points = cfg.get("points")
    if n == 1:
        cols, rows = figures.figure1_table(params, float(cfg["horizon"]), int(cfg["steps"]), int(cfg["seed"]))
    elif n in (2, 3):
        cols, rows = figures.vanilla_table(n, params, float(cfg["strike"]), float(cfg["maturity"]),
                                           points=int(points or 500))
    else:
        cols, rows = figures.nneg_table(params, float(cfg["strike"]), params.s0, points=int(points or 400))
    with open(out / f"figure_{n}.csv", "w", newline="") as fh:
        figures.write_table(cols, rows, fh)
    return {"figure": n, "rows": len(rows), "file": f"figure_{n}.csv"}


def cmd_sweep(cfg, out: Path) -> dict:
    target = cfg["target"]
    axes = cfg.get("axes") or DEFAULT_SWEEP_AXES[target]
    base = {k: float(v) for k, v in (cfg.get("base") or {}).items()}
    try:
        result = violation_sweep(target, axes, base)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with open(out / "sweep.csv", "w", newline="") as fh:
        result.to_csv(fh)
    summary = result.summary()
    _write_json(out / "certificate.json", summary)
    return {k: summary[k] for k in ("target", "n_cells", "n_violated", "n_undefined", "first_violation")}


COMMANDS = {"simulate": cmd_simulate, "arb": cmd_arb, "price": cmd_price, "figure": cmd_figure,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        echo = {k: v for k, v in cfg.items() if k != "out"}
        _write_json(out / "config.json", echo)
        result = COMMANDS[cfg["command"]](cfg, out)
    except PricingError as exc:
        print(f"rgbm: pricing error: {exc}", file=sys.stderr)
        return EXIT_PRICING
    except (ParamError, UsageError, ValueError, TypeError, KeyError) as exc:
        print(f"rgbm: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rgbm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
