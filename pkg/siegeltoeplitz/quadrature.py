# -*- coding: utf-8 -*-
"""Tensor quadrature over chart boxes and Bergman balls.

Integrals over a Region run in chart coordinates, where dV is
dx' dy' dx_n dh. Each axis is a list of Gauss-Legendre panels:

- h: geometric panels (log-substituted) from rho_min to rho_max.
- Re z_n: linear panels of width core_step out to core, then
  geometric panels that double in length out to re_zn_bound. The rule
  is mirrored onto the negative half.
- each z'_j: polar coordinates, with the radius treated like the
  positive half of Re z_n and a trapezoid rule in the angle.

Integrands are vectorized callables taking a complex array shaped
(m, n) and returning m real values.
"""
from __future__ import annotations
from __future__ import division

import functools
import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from numpy.polynomial.legendre import leggauss

from siegeltoeplitz import (
    DomainError,
    ToleranceError,
    emit_cast,
)
from siegeltoeplitz.geometry import (
    inverse_automorphism_array,
    rho,
)
from siegeltoeplitz.lattice import Region

logger = logging.getLogger(__name__)

CHUNK_POINTS = 1 << 18
BALL_ORDER = 16
BALL_ORDER_DROP = 4
_EDGE_TOLERANCE = 1e-9


@functools.lru_cache(maxsize=None)
def _legendre(order):
    xi, w = leggauss(order)
    xi.flags.writeable = False
    w.flags.writeable = False
    return xi, w


@dataclass(frozen=True)
class Panel:
    low: float
    high: float
    geometric: bool = False

    def split(self):
        if self.geometric:
            middle = math.sqrt(self.low * self.high)
        else:
            middle = 0.5 * (self.low + self.high)
        return (Panel(self.low, middle, self.geometric),
                Panel(middle, self.high, self.geometric))

    def rule(self, order):
        xi, w = _legendre(order)
        if self.geometric:
            a = math.log(self.low)
            b = math.log(self.high)
            nodes = np.exp(0.5 * (a + b) + 0.5 * (b - a) * xi)
            return nodes, 0.5 * (b - a) * w * nodes
        half = 0.5 * (self.high - self.low)
        return 0.5 * (self.low + self.high) + half * xi, half * w


def _add_anchors(edges, anchors):
    edges = list(edges)
    low, high = edges[0], edges[-1]
    for anchor in anchors:
        if not low < anchor < high:
            continue
        if any(abs(anchor - e) <= _EDGE_TOLERANCE * max(abs(e), 1.0)
               for e in edges):
            continue
        edges.append(anchor)
    return sorted(edges)


def height_panels(low, high, anchors=()):
    """Geometric panels of ratio 2 from low to high."""
    edges = [low]
    while edges[-1] * 2.0 < high * (1.0 - _EDGE_TOLERANCE):
        edges.append(edges[-1] * 2.0)
    edges.append(high)
    edges = _add_anchors(edges, anchors)
    return tuple(Panel(a, b, True) for a, b in zip(edges[:-1], edges[1:]))


def half_line_panels(bound, core, core_step, anchors=()):
    """Panels on [0, bound]: linear up to core, then doubling."""
    core = min(core, bound)
    steps = max(1, int(math.ceil(core / core_step - _EDGE_TOLERANCE)))
    edges = [core * k / steps for k in range(steps + 1)]
    while edges[-1] * 2.0 < bound * (1.0 - _EDGE_TOLERANCE):
        edges.append(edges[-1] * 2.0)
    if edges[-1] < bound:
        edges.append(bound)
    edges = _add_anchors(edges, anchors)
    return tuple(Panel(a, b, a >= core * (1.0 - _EDGE_TOLERANCE))
                 for a, b in zip(edges[:-1], edges[1:]))


def _panels_rule(panels, order):
    parts = [p.rule(order) for p in panels]
    return (np.concatenate([nodes for nodes, _ in parts]),
            np.concatenate([weights for _, weights in parts]))


def _line_rule(panels, order):
    nodes, weights = _panels_rule(panels, order)
    return (np.concatenate([-nodes[::-1], nodes]),
            np.concatenate([weights[::-1], weights]))


def _zprime_rule(panels, order, angular_nodes, n):
    """Tensor rule over the polydisc of z' in polar coordinates.

    Returns:
        tuple(np.ndarray): nodes shaped (P, n-1) and weights shaped (P,).
    """
    nodes = np.zeros((1, n - 1), dtype=complex)
    weights = np.ones(1)
    if n == 1:
        return nodes, weights
    radii, radial_weights = _panels_rule(panels, order)
    angles = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    disc = (radii[:, None] * np.exp(1j * angles)[None, :]).reshape(-1)
    disc_weights = np.repeat(radial_weights * radii * 2.0 * math.pi
                             / angular_nodes, angular_nodes)
    for j in range(n - 1):
        count = nodes.shape[0]
        nodes = np.repeat(nodes, disc.size, axis=0)
        nodes[:, j] = np.tile(disc, count)
        weights = np.repeat(weights, disc.size) * np.tile(disc_weights,
                                                          count)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature settings for integrals over a Region.

    Args:
        region (Region): Truncation to integrate over.
        nodes (int): Gauss-Legendre order per panel. The error estimate
            compares against order nodes - 2.
        angular_nodes (int): Trapezoid nodes per z' angle.
        core (float): Half-width of the linearly paneled core of the
            Re z_n axis and of the z' radius.
        core_step (float): Panel width inside the core.
        rel_tol (float): Target of error_estimate / |value|.
        max_refinements (int): Times every panel may be split in two.
        threads (int): Worker threads for panel chunks.
        tail (bool): Also estimate the truncation tail from two nested
            truncations.
    """
    region: Region
    nodes: int = 6
    angular_nodes: int = 8
    core: float = 2.0
    core_step: float = 0.25
    rel_tol: float = 1e-2
    max_refinements: int = 3
    threads: int = 1
    tail: bool = True

    def __post_init__(self):
        if not isinstance(self.region, Region):
            raise DomainError("region must be a Region but got {}"
                              .format(emit_cast(self.region)))
        for name, least in (("nodes", 2), ("angular_nodes", 1),
                            ("max_refinements", 0), ("threads", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) \
                    or value < least:
                raise DomainError("{} must be an int >= {} but got {}"
                                  .format(name, least, emit_cast(value)))
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError("rel_tol must be in (0, 1) but got {}"
                              .format(self.rel_tol))
        if not (self.core > 0 and self.core_step > 0):
            raise DomainError("core and core_step must be positive")

    @property
    def n(self):
        return self.region.n

    def with_region(self, region):
        return replace(self, region=region)

    def to_json(self):
        return {
            "region": self.region.to_json(),
            "nodes": self.nodes,
            "angular_nodes": self.angular_nodes,
            "core": self.core,
            "core_step": self.core_step,
            "rel_tol": self.rel_tol,
            "max_refinements": self.max_refinements,
            "tail": self.tail,
        }

    @classmethod
    def from_json(cls, data, region=None, **overrides):
        settings = dict(data)
        if region is None:
            region = Region.from_json(settings["region"])
        settings.pop("region", None)
        settings.update(overrides)
        return cls(region=region, **settings)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    tail_estimate: Optional[float] = None
    level: int = 0
    points: int = 0
    region: Optional[Region] = None
    estimates: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def corrected_value(self):
        """value plus the tail estimate when the tail is finite."""
        if self.tail_estimate is None or not math.isfinite(
                self.tail_estimate):
            return self.value
        return self.value + self.tail_estimate

    def to_json(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "tail_estimate": self.tail_estimate,
            "level": self.level,
            "points": self.points,
            "region": (self.region.to_json()
                       if self.region is not None else None),
        }


@dataclass(frozen=True)
class _Layout:
    heights: Tuple[Panel, ...]
    line: Tuple[Panel, ...]
    radial: Tuple[Panel, ...]

    @classmethod
    def initial(cls, spec, region):
        return cls(
            heights=height_panels(
                region.rho_min, region.rho_max,
                anchors=(region.rho_max / 4.0, region.rho_max / 16.0)),
            line=half_line_panels(
                region.re_zn_bound, spec.core, spec.core_step,
                anchors=(region.re_zn_bound / 4.0,
                         region.re_zn_bound / 16.0)),
            radial=half_line_panels(
                region.zprime_radius, spec.core, spec.core_step,
                anchors=(region.zprime_radius / 2.0,
                         region.zprime_radius / 4.0)),
        )

    def refined(self):
        def split_all(panels):
            return tuple(half for p in panels for half in p.split())
        return _Layout(split_all(self.heights), split_all(self.line),
                       split_all(self.radial))


def _chunk_sum(func, n, hs, wh, xs, wx, zp, wp):
    zp_sq = np.sum(np.abs(zp) ** 2, axis=-1)
    coords = np.empty((hs.size, xs.size, zp.shape[0], n), dtype=complex)
    coords[..., :-1] = zp[None, None, :, :]
    coords[..., -1] = (xs[None, :, None]
                       + 1j * (hs[:, None, None] + zp_sq[None, None, :]))
    values = np.asarray(func(coords.reshape(-1, n)), dtype=float)
    values = values.reshape(coords.shape[:-1])
    weights = wh[:, None, None] * wx[None, :, None] * wp[None, None, :]
    return float(np.sum(values * weights))


def _evaluate(func, spec, layout, order):
    n = spec.n
    zp, wp = _zprime_rule(layout.radial, order, spec.angular_nodes, n)
    xs, wx = _line_rule(layout.line, order)
    block = max(1, CHUNK_POINTS // (order * zp.shape[0]))
    tasks = []
    for panel in layout.heights:
        hs, wh = panel.rule(order)
        for start in range(0, xs.size, block):
            tasks.append((hs, wh, xs[start:start + block],
                          wx[start:start + block]))

    def run(task):
        hs, wh, xb, wxb = task
        return _chunk_sum(func, n, hs, wh, xb, wxb, zp, wp)

    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as executor:
            partials = list(executor.map(run, tasks))
    else:
        partials = [run(task) for task in tasks]
    total = 0.0
    for partial in partials:
        total += partial
    points = sum(t[0].size * t[2].size for t in tasks) * zp.shape[0]
    return total, points


def _integrate_region(func, spec, region):
    layout = _Layout.initial(spec, region)
    previous = None
    lower_order = max(1, spec.nodes - 2)
    points = 0
    for level in range(spec.max_refinements + 1):
        high, count = _evaluate(func, spec, layout, spec.nodes)
        low, low_count = _evaluate(func, spec, layout, lower_order)
        points += count + low_count
        if not (math.isfinite(high) and math.isfinite(low)):
            raise ToleranceError(
                "The integrand is not finite on {}".format(region),
                estimates=(low, high), error_estimate=math.inf)
        error = abs(high - low)
        logger.debug("level {}: {!r} (error {:.3e})"
                     .format(level, high, error))
        if error <= spec.rel_tol * abs(high):
            return QuadratureResult(high, error, None, level, points,
                                    region, (low, high))
        if level == spec.max_refinements:
            estimates = (low, high) if previous is None else (previous,
                                                              high)
            raise ToleranceError(
                "Relative error {:.3e} is above {} after {} refinements"
                .format(error / abs(high) if high else math.inf,
                        spec.rel_tol, level),
                estimates=estimates, error_estimate=error)
        previous = high
        layout = layout.refined()


def nested_tail(values):
    """Power-law tail from integrals over three nested truncations.

    Args:
        values (Sequence[float]): I0, I1, I2, from the largest truncation
            to the smallest; each shrinks the outer bounds by the same
            factor.

    Returns:
        float: The estimated remainder beyond the largest truncation,
            inf if the differences do not decay, or None if the ratio
            cannot be formed.
    """
    i0, i1, i2 = values
    d1 = i0 - i1
    d2 = i1 - i2
    if d2 == 0.0:
        return 0.0 if d1 == 0.0 else None
    q = d1 / d2
    if not math.isfinite(q) or q < 0.0:
        return None
    if q >= 1.0:
        return math.inf
    return d1 * q / (1.0 - q)


def nested_regions(region):
    """Regions with outer bounds shrunk 4 and 16 times (z' by 2 and 4)."""
    regions = []
    for factor in (4.0, 16.0):
        if region.rho_max / factor <= region.rho_min:
            return None
        regions.append(region.scaled(1.0 / factor))
    return regions


def integrate(func, spec):
    """Integrate func dV over spec.region.

    Args:
        func (Callable): Vectorized integrand on complex arrays (m, n).
        spec (QuadratureSpec): Truncation and rule settings.

    Returns:
        QuadratureResult: value with error and tail estimates.

    Raises:
        ToleranceError: rel_tol was not met within max_refinements.
    """
    result = _integrate_region(func, spec, spec.region)
    if not spec.tail:
        return result
    tail = None
    inner = nested_regions(spec.region)
    if inner is not None:
        try:
            values = [result.value] + [
                _integrate_region(func, spec, region).value
                for region in inner]
            tail = nested_tail(values)
        except ToleranceError as ex:
            logger.warning("No tail estimate: {}".format(ex))
    return replace(result, tail_estimate=tail)


@functools.lru_cache(maxsize=64)
def _ball_rule(n, r, order, angular_nodes):
    """Nodes and weights for D((0', i), r) in chart coordinates."""
    t = math.tanh(r)
    c = 1.0 - t * t
    reach_sq = t * t / c
    xi, wi = _legendre(order)
    angles = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    unit = np.exp(1j * angles)
    zp = np.zeros((1, n - 1), dtype=complex)
    weights = np.ones(1)
    used = np.zeros(1)
    for j in range(n - 1):
        reach = np.sqrt(np.maximum(reach_sq - used, 0.0))
        radii = 0.5 * reach[:, None] * (xi[None, :] + 1.0)
        radial_w = 0.5 * reach[:, None] * wi[None, :] * radii
        zp = np.repeat(zp, order * angular_nodes, axis=0)
        ring = (radii[:, :, None] * unit[None, None, :]).reshape(-1)
        zp[:, j] = ring
        weights = (np.repeat(weights, order * angular_nodes)
                   * np.repeat(radial_w.reshape(-1), angular_nodes)
                   * (2.0 * math.pi / angular_nodes))
        used = (np.repeat(used, order * angular_nodes)
                + np.abs(ring) ** 2)
    x_reach = 2.0 * np.sqrt(np.maximum(1.0 - c * (used + 1.0), 0.0)) / c
    phi = 0.5 * math.pi * xi
    phi_w = 0.5 * math.pi * wi
    # x = X0 sin(phi); h spans X0 cos(phi) on each side of its center
    span = x_reach[:, None] * np.cos(phi)[None, :]
    xs = x_reach[:, None] * np.sin(phi)[None, :]
    x_w = span * phi_w[None, :]
    center = 2.0 / c - used - 1.0
    hs = center[:, None, None] + span[:, :, None] * xi[None, None, :]
    h_w = span[:, :, None] * wi[None, None, :]
    k = zp.shape[0]
    coords = np.empty((k, order, order, n), dtype=complex)
    coords[..., :-1] = zp[:, None, None, :]
    coords[..., -1] = (xs[:, :, None]
                       + 1j * (hs + used[:, None, None]))
    total_w = weights[:, None, None] * x_w[:, :, None] * h_w
    coords = coords.reshape(-1, n)
    total_w = total_w.reshape(-1)
    coords.flags.writeable = False
    total_w.flags.writeable = False
    return coords, total_w


def ball_integral(func, z, r, order=BALL_ORDER, angular_nodes=8,
                  rel_tol=None):
    """Integrate func dV over the Bergman ball D(z, r).

    The ball of (0', i) has exact limits in chart coordinates, and
    σ_z⁻¹ carries it onto D(z, r) with Jacobian ρ(z)^{n+1}.

    Args:
        func (Callable): Vectorized integrand on complex arrays (m, n).
        z (SiegelPoint): Center.
        r (float): Radius.
        order (int): Gauss-Legendre order per coordinate.
        angular_nodes (int): Trapezoid nodes per z' angle.
        rel_tol (float, optional): If set, raise ToleranceError when the
            comparison against order - 4 disagrees by more than this.

    Returns:
        QuadratureResult: The integral and its error estimate.
    """
    if isinstance(r, bool) or not (isinstance(r, (int, float))
                                   and math.isfinite(r) and r > 0):
        raise DomainError("r must be a positive real but got {}"
                          .format(emit_cast(r)))
    coords = z.coords if hasattr(z, "coords") else np.asarray(z, complex)
    n = coords.shape[-1]
    scale = rho(coords) ** (n + 1)
    values = []
    points = 0
    for current in (order, max(2, order - BALL_ORDER_DROP)):
        nodes, weights = _ball_rule(n, float(r), current, angular_nodes)
        mapped = inverse_automorphism_array(coords, nodes)
        f = np.asarray(func(mapped), dtype=float)
        values.append(scale * float(np.sum(f * weights)))
        points += weights.size
    value, low = values
    error = abs(value - low)
    if rel_tol is not None and error > rel_tol * abs(value):
        raise ToleranceError(
            "Ball integral error {:.3e} exceeds rel_tol {}"
            .format(error, rel_tol),
            estimates=(low, value), error_estimate=error)
    return QuadratureResult(value, error, None, 0, points, None,
                            (low, value))
