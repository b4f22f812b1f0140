import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import PHI_196, ncdf
from conftest import FIG1, FIG2, FIG3, FIG4
from rgbm import ModelParams, OptionKind, OptionSpec, ParamError, PricingError, norm_cdf, theta_exponent, validate_params

finite = st.floats(min_value=-40, max_value=40, allow_nan=False)


def test_norm_cdf_at_zero():
    assert norm_cdf(0.0) == 0.5


def test_norm_cdf_196():
    assert abs(norm_cdf(1.96) - PHI_196) < 1e-10
    assert abs(norm_cdf(1.96) - float(ncdf(1.96))) < 1e-15


@pytest.mark.parametrize("x", [0.1, 1.0, 3.0, 7.0])
def test_norm_cdf_symmetry(x):
    assert abs(norm_cdf(-x) + norm_cdf(x) - 1.0) <= 1e-14


def test_norm_cdf_absolute_error_against_high_precision():
    xs = np.linspace(-12, 12, 2001)
    err = max(abs(float(norm_cdf(x)) - float(ncdf(x))) for x in xs)
    assert err <= 1e-12


def test_norm_cdf_monotone_on_grid():
    y = norm_cdf(np.linspace(-40, 40, 100_001))
    assert np.all(np.diff(y) >= 0)
    assert y.min() >= 0 and y.max() <= 1


@given(finite)
def test_norm_cdf_properties(x):
    p = norm_cdf(x)
    assert 0.0 <= p <= 1.0
    assert abs(p + norm_cdf(-x) - 1.0) <= 1e-14


def test_theta_examples():
    assert theta_exponent(0.125, 0.0, 0.5) == 1.0
    assert theta_exponent(0.04, 0.04, 0.3) == 0.0
    assert math.isclose(theta_exponent(0.0, 0.03, 0.3), -2.0 / 3.0, rel_tol=1e-14)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 2))
def test_theta_antisymmetric(r, q, sigma):
    assert theta_exponent(r, q, sigma) == -theta_exponent(q, r, sigma)


def test_theta_rejects_zero_sigma():
    with pytest.raises(ParamError):
        theta_exponent(0.1, 0.0, 0.0)


@pytest.mark.parametrize("params", [FIG1, FIG2, FIG3, FIG4])
def test_figure_parameter_sets_are_valid(params):
    assert validate_params(params) is params


def test_boundary_start_accepted():
    p = FIG1.replace(s0=1.0)
    assert validate_params(p) is p


@pytest.mark.parametrize(
    "changes,code",
    [
        ({"sigma": 0.0}, "sigma_nonpositive"),
        ({"sigma": -0.1}, "sigma_nonpositive"),
        ({"b": 0.0}, "boundary_nonpositive"),
        ({"s0": 0.5}, "start_below_boundary"),
        ({"r": -0.01}, "negative_rate"),
        ({"q": -0.01}, "negative_rate"),
        ({"mu": float("nan")}, "non_finite"),
        ({"s0": float("inf")}, "non_finite"),
    ],
)
def test_validation_codes(changes, code):
    with pytest.raises(ParamError) as exc:
        validate_params(FIG1.replace(**changes))
    assert exc.value.code == code


def test_option_spec_validation():
    assert OptionSpec("put", 2.0, 10.0, 3.0).tau == 7.0
    assert OptionSpec("call", 2.0, 1.0).kind is OptionKind.CALL
    for args, code in [((2.0, 1.0, 2.0), "bad_times"), ((-1.0, 1.0), "negative_strike"),
                       ((float("nan"), 1.0), "non_finite")]:
        with pytest.raises(PricingError) as exc:
            OptionSpec("call", *args)
        assert exc.value.code == code
