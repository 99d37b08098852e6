# -*- coding: utf-8 -*-
"""Numerical toolkit for Toeplitz operators on the Siegel upper half-space.

Modules:
    special: Lanczos gamma function.
    geometry: rho-form, Bergman kernel and metric, automorphisms, balls.
    lattice: truncated regions and r-lattices.
    quadrature: chart-based tensor quadrature and ball integrals.
    measures: atomic and density symbols.
    transforms: averaging functions, Berezin transforms, L^p(dλ) norms.
    schatten: Gram-matrix spectra and Schatten norms.
    experiments: config-driven verification scenarios and the CLI.
"""
from __future__ import annotations  # Union[ and possibly others
from typing import Union, Generator

import logging

logger = logging.getLogger(__name__)


class PairsTypeError(TypeError):
    pass


class DomainError(ValueError):
    """A point, radius, or region is outside the allowed domain."""


class DimensionMismatchError(ValueError):
    pass


class MetricConsistencyError(ArithmeticError):
    pass


class ToleranceError(ArithmeticError):
    """Quadrature did not reach the requested relative tolerance.

    Attributes:
        estimates (tuple[float]): The last two estimates of the integral.
        error_estimate (float): The last absolute error estimate.
    """
    def __init__(self, message, estimates=(), error_estimate=None):
        ArithmeticError.__init__(self, message)
        self.estimates = tuple(estimates)
        self.error_estimate = error_estimate


class LatticeConstructionError(RuntimeError):
    def __init__(self, message, sample=None):
        RuntimeError.__init__(self, message)
        self.sample = sample


class DivergentParametersError(ValueError):
    pass


class EigensolveError(ArithmeticError):
    pass


class ConfigError(ValueError):
    pass


def emit_cast(value):
    # formerly typed_name
    return "{}({})".format(type(value).__name__, repr(value))


def pairs(data: Union[list, dict]) -> Generator:
    """Generate key-value pairs from a list or dictionary.

    Args:
        data (Union[list, dict]): The input data, which must be a list
            or dictionary.

    Yields:
        tuple: A tuple containing the key (or index) and the
            corresponding value.

    Raises:
        TypeError: If the input data is not a list or dictionary.
    """
    if isinstance(data, list):
        yield from enumerate(data)
    elif isinstance(data, dict):
        yield from data.items()
    else:
        raise PairsTypeError(
            "Only dict or list is allowed, but got {}"
            .format(emit_cast(data)))


def query_dict(d, q, default=None):
    """Get a nested value of a dict using an xpath-like query.

    Args:
        d (dict): Any dictionary such as a loaded experiment config.
        q (str): Path split by "/" into a depth-wise list such as
            "/region/rho_min" (all levels must match, or there is no
            match).
        default (Any, optional): Returned when there is no match.

    Raises:
        TypeError: d is not dict, or q is not str

    Returns:
        Any: the matching sub-element, or default.
    """
    # based on <https://stackoverflow.com/a/7320730/4541104>
    # MarcoS. Sep 6, 2011. Accessed Aug 23, 2024.
    if not isinstance(d, dict):
        raise TypeError("d must be dict but got {}"
                        .format(emit_cast(d)))
    if not isinstance(q, str):
        raise TypeError("query path must be str but got {}"
                        .format(emit_cast(q)))
    keys = q.split('/')  # Make depth-wise (not parallel) list.
    nd = d
    for k in keys:
        if k == '':
            continue
        if isinstance(nd, dict) and k in nd:
            nd = nd[k]
        else:
            return default
    return nd


def get_all_queries(d, parent=""):
    """List the xpath-like query of every leaf in nested data.

    Args:
        d (Union[list, dict]): Nested data such as a loaded config.
        parent (str, optional): Prefix for the generated queries.

    Returns:
        list[str]: Queries usable with query_dict, in data order.
    """
    queries = []
    if isinstance(d, (list, dict)):
        for k, v in pairs(d):
            if isinstance(v, (list, dict)):
                if not v:
                    # empty list or dict, so recursion would show
                    #   nothing. therefore treat this as a leaf.
                    queries.append("{}/{}".format(parent, k))
                else:
                    queries += get_all_queries(v, "{}/{}".format(parent, k))
            else:
                queries.append("{}/{}".format(parent, k))
    else:
        raise RecursionError(
            "Cannot determine path since got value without key(s): {}"
            .format(d))
    return queries
