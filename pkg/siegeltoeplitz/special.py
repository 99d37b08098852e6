# -*- coding: utf-8 -*-
"""Gamma function for the key integral constant and n!.

Lanczos approximation with g = 7 and nine coefficients, accurate to
roughly 15 significant digits for real arguments. Arguments below 1/2
use the reflection formula.
"""
from __future__ import division

import logging
import math

from siegeltoeplitz import (
    DomainError,
    emit_cast,
)

logger = logging.getLogger(__name__)

LANCZOS_G = 7
LANCZOS_BASE = 0.99999999999980993
LANCZOS_COEFFICIENTS = (
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _check_argument(x):
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        try:
            x = float(x)
        except (TypeError, ValueError):
            raise TypeError("Expected a real number but got {}"
                            .format(emit_cast(x)))
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("Gamma needs a finite argument, got {}"
                          .format(emit_cast(x)))
    if x <= 0 and x == math.floor(x):
        raise DomainError("Gamma has a pole at {}".format(x))
    return x


def _lanczos_series(z):
    # z is already shifted down by one
    x = LANCZOS_BASE
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS):
        x += coefficient / (z + i + 1)
    return x


def gamma(x):
    """Evaluate Γ(x) for real x that is not a pole.

    Args:
        x (float): Any real number except 0, -1, -2, ...

    Returns:
        float: Γ(x).

    Raises:
        DomainError: x is a pole or is not finite.
    """
    x = _check_argument(x)
    if x < 0.5:
        # reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    return (math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t)
            * _lanczos_series(z))


def log_gamma(x):
    """Evaluate ln|Γ(x)|, which stays finite where Γ overflows.

    Args:
        x (float): Any real number except 0, -1, -2, ...

    Returns:
        float: The natural log of the absolute value of Γ(x).
    """
    x = _check_argument(x)
    if x < 0.5:
        return (math.log(math.pi / abs(math.sin(math.pi * x)))
                - log_gamma(1.0 - x))
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    return (HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t
            + math.log(_lanczos_series(z)))
