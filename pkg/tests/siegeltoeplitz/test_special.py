from __future__ import division

import math

import pytest

from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as scipy_special

from siegeltoeplitz import DomainError
from siegeltoeplitz.special import (
    gamma,
    log_gamma,
)


@pytest.mark.parametrize("x,expected", [
    (1, 1.0),
    (2, 1.0),
    (5, 24.0),
    (0.5, math.sqrt(math.pi)),
    (-0.5, -2 * math.sqrt(math.pi)),
])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 150))
def test_log_gamma_matches_scipy(x):
    assert log_gamma(x) == pytest.approx(float(scipy_special.gammaln(x)),
                                         rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_gamma_matches_math(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-9)


@pytest.mark.parametrize("x", [0, -1, -7, float("inf"), float("nan")])
def test_poles_and_non_finite(x):
    with pytest.raises(DomainError):
        gamma(x)
    with pytest.raises(DomainError):
        log_gamma(x)


def test_bad_type():
    with pytest.raises(TypeError):
        gamma("five")
