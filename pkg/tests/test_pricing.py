import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles as o
from conftest import FIG2, FIG3, FIG4
from rgbm import (
    ModelParams,
    OptionSpec,
    PricingError,
    black76_put,
    bs_call,
    bs_put,
    mc_price,
    rgbm_call,
    rgbm_nneg,
    rgbm_put,
)
from rgbm.simulate import TimeGrid

CALL = OptionSpec("call", 2.0, 10.0)
PUT = OptionSpec("put", 2.0, 10.0)
NNEG20 = OptionSpec("nneg", 0.9, 20.0)


def test_expiry_values():
    p = FIG2.replace(s0=1.5)
    assert rgbm_call(OptionSpec("call", 2.0, 5.0, 5.0), 1.5, p).value == 0.0
    assert rgbm_put(OptionSpec("put", 2.0, 5.0, 5.0), 1.5, FIG3).value == 0.5
    assert rgbm_nneg(OptionSpec("nneg", 0.9, 3.0, 3.0), 0.7, FIG4).value == pytest.approx(0.2, abs=1e-15)
    assert black76_put(OptionSpec("nneg", 0.9, 3.0, 3.0), 0.7, 0.0, 0.03, 0.3).value == pytest.approx(0.2)


def test_call_at_boundary_matches_closed_display():
    price = rgbm_call(CALL, 1.0, FIG2).value
    oracle = float(o.call_at_boundary(1.0, 2.0, 10.0, 0.125, 0.5))
    assert abs(price - oracle) < 1e-10
    assert abs(price - o.CALL_AT_B_FIG2) < 1e-10
    assert price > FIG2.b


def test_put_at_boundary_matches_closed_display():
    price = rgbm_put(PUT, 1.0, FIG3).value
    oracle = float(o.put_at_boundary(1.0, 2.0, 10.0, 0.02, 0.2))
    assert abs(price - oracle) < 1e-10
    assert abs(price - o.PUT_AT_B_FIG3) < 1e-10
    assert price < 2 * math.exp(-0.2) - 1


@pytest.mark.parametrize("r", [0.02, 0.08, 0.125, 0.3])
@pytest.mark.parametrize("K", [1.0, 1.7, 4.0])
def test_boundary_displays_on_theta_one_line(r, K):
    sigma = math.sqrt(2 * r)
    p = ModelParams(mu=r, sigma=sigma, b=1.0, r=r, s0=1.0)
    for tau in (0.5, 10.0):
        c = rgbm_call(OptionSpec("call", K, tau), 1.0, p).value
        q = rgbm_put(OptionSpec("put", K, tau), 1.0, p).value
        assert abs(c - float(o.call_at_boundary(1.0, K, tau, r, sigma))) < 1e-10
        assert abs(q - float(o.put_at_boundary(1.0, K, tau, r, sigma))) < 1e-10


def test_convergence_to_black_scholes_far_from_boundary():
    s = 100.0
    c, cb = rgbm_call(CALL, s, FIG2).value, bs_call(CALL, s, 0.125, 0.5).value
    p, pb = rgbm_put(PUT, s, FIG3).value, bs_put(PUT, s, 0.02, 0.2).value
    assert abs(c / cb - 1) < 1e-3
    assert abs(p / pb - 1) < 1e-3


def test_nneg_figure4_values():
    v = rgbm_nneg(NNEG20, 1.0, FIG4)
    assert abs(v.value - o.NNEG_FIG4_T20) < 1e-12
    assert v.intermediates.family == "nneg" and v.intermediates.z2 is not None
    b76 = black76_put(NNEG20, 1.0, 0.0, 0.03, 0.3).value
    assert abs(b76 - float(o.lognormal_put(1.0, 0.9, 20.0, 0.0, 0.03, 0.3))) < 1e-13
    assert abs(b76 - 0.556) < 5e-4
    bound = 0.9 - math.exp(-0.6)
    assert abs(v.value / bound - 0.46) <= 0.01
    assert abs(v.value / b76 - 0.29) <= 0.01


S_GRID = [1.0, 1.3, 2.0, 3.0, 5.0]
K_GRID = [1.0, 1.5, 2.0, 3.0, 4.0]
TAU_GRID = [1.0, 5.0, 10.0]


@pytest.mark.parametrize("r,sigma", [(0.05, 0.25), (0.02, 0.2)])
def test_nneg_without_deferment_equals_put(r, sigma):
    p = ModelParams(mu=r, sigma=sigma, b=1.0, r=r, q=0.0)
    for s, K, tau in itertools.product(S_GRID, K_GRID, TAU_GRID):
        a = rgbm_nneg(OptionSpec("nneg", K, tau), s, p).value
        b = rgbm_put(OptionSpec("put", K, tau), s, p).value
        # relative 1e-9, with an absolute floor for prices that are rounding noise
        assert abs(a - b) <= 1e-9 * abs(b) + 1e-14, (s, K, tau, a, b)


def test_intermediates_are_family_specific():
    v = rgbm_put(PUT, 1.5, FIG3).intermediates
    n = rgbm_nneg(OptionSpec("nneg", 2.0, 10.0), 1.5, FIG3).intermediates
    assert v.family == "vanilla" and v.z2 is None
    assert v.z3 != n.z3 and v.z4 != n.z4
    assert v.z1 == pytest.approx(n.z1)
    d = v.to_dict()
    assert set(d) >= {"theta", "tau", "z1", "z3", "z4"}


@pytest.mark.parametrize(
    "fn,spec,s,params,code",
    [
        (rgbm_call, CALL, 1.5, FIG2.replace(r=0.0), "theta_zero_unsupported"),
        (rgbm_put, PUT, 1.5, FIG3.replace(r=0.0), "theta_zero_unsupported"),
        (rgbm_nneg, NNEG20, 1.0, FIG4.replace(r=0.03), "theta_zero_unsupported"),
        (rgbm_call, CALL, 0.5, FIG2, "below_boundary"),
        (rgbm_call, OptionSpec("call", 0.5, 1.0), 1.5, FIG2, "strike_below_boundary"),
        (rgbm_call, PUT, 1.5, FIG2, "wrong_kind"),
        (rgbm_call, CALL, 1e5, FIG2.replace(r=5.0, sigma=0.1), "exponent_out_of_range"),
    ],
)
def test_pricing_errors(fn, spec, s, params, code):
    with pytest.raises(PricingError) as exc:
        fn(spec, s, params)
    assert exc.value.code == code


def test_black_scholes_reference():
    spec = OptionSpec("call", 100.0, 1.0)
    c = bs_call(spec, 100.0, 0.05, 0.2).value
    assert abs(c - 10.4506) <= 1e-4
    assert abs(c - o.BS_CALL_100) < 1e-12


def test_black_scholes_degenerate_strike():
    assert bs_call(OptionSpec("call", 0.0, 2.0), 3.0, 0.05, 0.2).value == 3.0
    assert bs_call(OptionSpec("call", 1e-12, 2.0), 3.0, 0.05, 0.2).value == pytest.approx(3.0, rel=1e-12)


pos = st.floats(0.01, 50.0)


@settings(max_examples=200)
@given(s=pos, K=pos, tau=st.floats(0.0, 30.0), r=st.floats(0.0, 0.3), sigma=st.floats(0.01, 2.0))
def test_put_call_parity(s, K, tau, r, sigma):
    spec = OptionSpec("call", K, tau)
    c, p = bs_call(spec, s, r, sigma).value, bs_put(spec, s, r, sigma).value
    assert abs(c - p - (s - K * math.exp(-r * tau))) <= 1e-12 * max(1.0, s, K)
    assert c >= 0 and p >= 0


@settings(max_examples=200)
@given(s=pos, K=pos, tau=st.floats(0.0, 30.0), r=st.floats(0.0, 0.3), sigma=st.floats(0.01, 2.0))
def test_black76_reduces_to_black_scholes(s, K, tau, r, sigma):
    spec = OptionSpec("put", K, tau)
    assert black76_put(spec, s, r, 0.0, sigma).value == bs_put(spec, s, r, sigma).value


@settings(max_examples=200)
@given(gap=st.floats(0.0, 4.0), kgap=st.floats(0.0, 4.0), tau=st.floats(0.01, 40.0),
       r=st.floats(0.005, 0.2), q=st.floats(0.0, 0.1), sigma=st.floats(0.1, 0.8))
def test_formula_values_finite(gap, kgap, tau, r, q, sigma):
    assume(abs(r - q) > 1e-3)
    p = ModelParams(mu=r, sigma=sigma, b=1.0, r=r, q=q)
    s, K = 1.0 + gap, 1.0 + kgap
    for fn, kind in ((rgbm_call, "call"), (rgbm_put, "put"), (rgbm_nneg, "nneg")):
        try:
            v = fn(OptionSpec(kind, K, tau), s, p).value
        except PricingError as exc:
            assert exc.code == "exponent_out_of_range"
            continue
        assert math.isfinite(v)


def test_quote_json_shape():
    d = rgbm_call(CALL, 1.0, FIG2).to_dict()
    assert d["method"] == "rgbm_formula" and "intermediates" in d
    e = mc_price(CALL, 1.5, FIG2, 1000, seed=1)
    assert set(e.to_quote().to_dict()) == {"method", "value", "std_error"}


def test_mc_zero_payoff():
    e = mc_price(OptionSpec("call", 1e6, 1.0), 1.5, FIG2, 5000, seed=0)
    assert e.mean == 0.0 and e.std_error == 0.0


def test_mc_unreachable_boundary_matches_black_scholes():
    p = FIG2.replace(b=1e-6)
    e = mc_price(CALL, 1.5, p, 100_000, seed=0)
    assert e.within(bs_call(CALL, 1.5, 0.125, 0.5).value, 3.0)
    g = mc_price(OptionSpec("put", 2.0, 10.0), 1.5, p, 100_000, seed=0)
    assert g.within(bs_put(PUT, 1.5, 0.125, 0.5).value, 3.0)


def test_mc_reflected_call_against_formula():
    e = mc_price(CALL, 1.5, FIG2, 200_000, seed=11)
    assert e.within(rgbm_call(CALL, 1.5, FIG2).value, 3.0)


def test_mc_exact_scheme_is_grid_independent_in_law():
    coarse = mc_price(CALL, 1.5, FIG2, 100_000, seed=12)
    fine = mc_price(CALL, 1.5, FIG2, 100_000, TimeGrid(0.0, 10.0, 50), seed=13)
    se = math.hypot(coarse.std_error, fine.std_error)
    assert abs(coarse.mean - fine.mean) < 3 * se


@pytest.mark.parametrize("tau", [5.0, 20.0])
def test_mc_nneg_against_formula(tau):
    spec = OptionSpec("nneg", 0.9, tau)
    e = mc_price(spec, 1.0, FIG4, 200_000, seed=5)
    assert e.within(rgbm_nneg(spec, 1.0, FIG4).value, 3.0)


def test_mc_put_against_formula():
    e = mc_price(PUT, 1.2, FIG3, 200_000, seed=6)
    assert e.within(rgbm_put(PUT, 1.2, FIG3).value, 3.0)


def test_mc_euler_scheme_against_formula():
    e = mc_price(CALL, 1.5, FIG2, 20_000, TimeGrid(0.0, 10.0, 1000), seed=5, scheme="euler")
    assert e.dt == 0.01
    assert e.within(rgbm_call(CALL, 1.5, FIG2).value, 3.0)


def test_mc_thread_invariance_and_reproducibility():
    a = mc_price(CALL, 1.5, FIG2, 50_000, seed=3, threads=1)
    b = mc_price(CALL, 1.5, FIG2, 50_000, seed=3, threads=4)
    c = mc_price(CALL, 1.5, FIG2, 50_000, seed=3, threads=1)
    assert a == c
    assert a.mean == b.mean and a.std_error == b.std_error


def test_mc_argument_checks():
    with pytest.raises(ValueError):
        mc_price(CALL, 1.5, FIG2, 1)
    with pytest.raises(ValueError):
        mc_price(CALL, 1.5, FIG2, 100, TimeGrid(0.0, 5.0, 10))
    with pytest.raises(ValueError):
        mc_price(CALL, 1.5, FIG2, 100, scheme="euler")
    assert mc_price(OptionSpec("put", 2.0, 1.0, 1.0), 1.5, FIG2, 10).mean == 0.5
