"""Reflected geometric Brownian motion: simulation, increasing-profit strategies
and an audit of closed-form reflected-GBM option and NNEG prices."""

from .core import (
    ModelParams,
    OptionKind,
    OptionSpec,
    ParamError,
    PricingError,
    PricingIntermediates,
    norm_cdf,
    theta_exponent,
    validate_params,
)
from .simulate import (
    PathSample,
    TimeGrid,
    first_passage_time,
    local_time_occupation_estimate,
    simulate_gbm_path,
    simulate_rgbm_path,
)
from .arbitrage import (
    CharacteristicsSpec,
    DiagnosticsReport,
    PortfolioTrajectory,
    run_reflection_arbitrage,
    run_two_rate_increasing_profit,
    structure_condition_diagnostic,
)
from .pricing import (
    MCEstimate,
    PriceQuote,
    black76_put,
    bs_call,
    bs_put,
    mc_price,
    rgbm_call,
    rgbm_nneg,
    rgbm_put,
)
from .bounds import (
    BoundVerdict,
    SweepResult,
    check_call_upper,
    check_nneg_lower,
    check_put_lower,
    nneg_asymptote,
    violation_sweep,
)

__version__ = "0.1.0"
