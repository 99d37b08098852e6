# -*- coding: utf-8 -*-
"""Symbols: finite atomic measures and truncated density measures.

Atomic measure files look like::

    {"atoms": [{"point": [[0, 1]], "weight": 1.0}, ...]}

Density measures are built from named families::

    {"family": "constant_on_box", "region": {...}, "value": 1.0}
    {"family": "gaussian", "region": {...}, "center": [[0, 1]],
     "width": 0.5, "amplitude": 1.0}
"""
from __future__ import annotations
from __future__ import division

import json
import logging
import math

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from siegeltoeplitz import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    emit_cast,
)
from siegeltoeplitz.geometry import (
    SiegelPoint,
    chart_array,
    inverse_chart_array,
    metric_array,
    point_from_json,
    point_to_json,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.quadrature import (
    QuadratureSpec,
    ball_integral,
    integrate,
)

logger = logging.getLogger(__name__)

DENSITY_FAMILIES = ("constant_on_box", "gaussian")


class AtomicMeasure:
    """μ = Σ_j c_j δ_{w_j} with c_j > 0.

    Args:
        atoms (Sequence[tuple]): (point, weight) pairs. A point may be a
            SiegelPoint or a coordinate sequence.
        n (int, optional): Dimension, required when atoms is empty.
    """
    __slots__ = ("_points", "_weights", "_coords", "_n")

    def __init__(self, atoms=(), n=None):
        points = []
        weights = []
        for point, weight in atoms:
            if not isinstance(point, SiegelPoint):
                point = SiegelPoint(point)
            weight = float(weight)
            if not (math.isfinite(weight) and weight > 0):
                raise DomainError("Atom weights must be positive but got {}"
                                  .format(weight))
            points.append(point)
            weights.append(weight)
        if points:
            dims = {p.n for p in points}
            if len(dims) > 1 or (n is not None and dims != {n}):
                raise DimensionMismatchError(
                    "Atoms have dimensions {} (expected n={})"
                    .format(sorted(dims), n))
            n = points[0].n
            coords = np.vstack([p.coords for p in points])
        else:
            if n is None:
                raise DomainError("An empty measure needs n.")
            coords = np.empty((0, n), dtype=complex)
        weights = np.array(weights, dtype=float)
        coords.flags.writeable = False
        weights.flags.writeable = False
        self._points = tuple(points)
        self._weights = weights
        self._coords = coords
        self._n = int(n)

    @property
    def n(self):
        return self._n

    @property
    def points(self):
        return self._points

    @property
    def weights(self):
        return self._weights

    @property
    def coords(self):
        return self._coords

    @property
    def atoms(self):
        return tuple(zip(self._points, self._weights.tolist()))

    def __len__(self):
        return len(self._points)

    def __repr__(self):
        return "AtomicMeasure(n={}, atoms={})".format(self._n, len(self))

    def total_mass(self):
        return float(np.sum(self._weights))

    def scaled(self, c):
        if not c > 0:
            raise DomainError("Scale must be positive but got {}".format(c))
        return AtomicMeasure(((p, w * c) for p, w in self.atoms), n=self._n)

    def pushforward(self, mapping):
        """Move every atom through mapping, keeping the weights."""
        return AtomicMeasure(((mapping(p), w) for p, w in self.atoms),
                             n=self._n)

    def with_atom(self, point, weight):
        return AtomicMeasure(self.atoms + ((point, weight),), n=self._n)

    def permuted(self, order):
        atoms = self.atoms
        return AtomicMeasure((atoms[i] for i in order), n=self._n)

    def to_json(self):
        data = {"atoms": [{"point": point_to_json(p), "weight": w}
                          for p, w in self.atoms]}
        if not self._points:
            data["n"] = self._n
        return data

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or "atoms" not in data:
            raise ConfigError("An atomic measure needs an atoms list but"
                              " got {}".format(emit_cast(data)))
        atoms = []
        for i, atom in enumerate(data["atoms"]):
            try:
                atoms.append((point_from_json(atom["point"]),
                              atom["weight"]))
            except (KeyError, TypeError) as ex:
                raise ConfigError("atoms[{}] is malformed: {}"
                                  .format(i, ex))
        return cls(atoms, n=data.get("n"))


@dataclass(frozen=True)
class DensityMeasure:
    """dμ = g dV with g supported on a Region.

    Args:
        density (Callable): Vectorized g on complex arrays (m, n).
        support (Region): g is treated as 0 outside.
        label (str): Family name, used in reports.
        params (dict): Family parameters, so the measure can be written
            back out.
    """
    density: Callable
    support: Region
    label: str = "density"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.support.n

    def evaluate(self, coords):
        coords = np.asarray(coords, dtype=complex)
        inside = self.support.contains(coords)
        values = np.zeros(inside.shape)
        if np.any(inside):
            values[inside] = np.asarray(self.density(coords[inside]),
                                        dtype=float)
        if np.any(values < 0):
            raise DomainError("Density {} is negative".format(self.label))
        return values

    def __call__(self, z):
        coords = z.coords if isinstance(z, SiegelPoint) else z
        return float(self.evaluate(np.asarray(coords)[None, :])[0])

    def to_json(self):
        data = {"family": self.label, "region": self.support.to_json()}
        data.update(self.params)
        return data


def constant_on_box(region, value=1.0):
    """g = value on the region, 0 elsewhere."""
    value = float(value)
    if not value >= 0:
        raise DomainError("value must be nonnegative but got {}"
                          .format(value))
    return DensityMeasure(
        lambda coords: np.full(coords.shape[:-1], value),
        region, "constant_on_box", {"value": value})


def gaussian(region, center, width, amplitude=1.0):
    """g = amplitude exp(-|c(z) - c(center)|² / (2 width²)) on region.

    c is the chart map, so the bump is Gaussian in (x', y', x_n, h).
    """
    if not isinstance(center, SiegelPoint):
        center = SiegelPoint(center)
    if center.n != region.n:
        raise DimensionMismatchError(
            "center has n={} but the region has n={}"
            .format(center.n, region.n))
    if not (width > 0 and amplitude >= 0):
        raise DomainError("width must be positive and amplitude"
                          " nonnegative")
    mid = inverse_chart_array(center.coords)
    scale = 2.0 * float(width) ** 2

    def density(coords):
        offset = inverse_chart_array(coords) - mid
        return amplitude * np.exp(-np.sum(offset ** 2, axis=-1) / scale)

    return DensityMeasure(
        density, region, "gaussian",
        {"center": point_to_json(center), "width": float(width),
         "amplitude": float(amplitude)})


def density_from_config(data):
    if not isinstance(data, dict):
        raise ConfigError("A density needs a dict but got {}"
                          .format(emit_cast(data)))
    family = data.get("family")
    try:
        region = Region.from_json(data["region"])
        if family == "constant_on_box":
            return constant_on_box(region, data.get("value", 1.0))
        if family == "gaussian":
            return gaussian(region, point_from_json(data["center"]),
                            data["width"], data.get("amplitude", 1.0))
    except KeyError as ex:
        raise ConfigError("Density family {} is missing {}"
                          .format(family, ex))
    raise ConfigError("Unknown density family {} (expected one of {})"
                      .format(emit_cast(family), DENSITY_FAMILIES))


def measure_from_config(data):
    """Build an AtomicMeasure or DensityMeasure from parsed JSON."""
    if isinstance(data, dict) and "atoms" in data:
        return AtomicMeasure.from_json(data)
    if isinstance(data, dict) and "family" in data:
        return density_from_config(data)
    raise ConfigError("A measure needs either atoms or family but got {}"
                      .format(emit_cast(data)))


def load_measure(path):
    with open(path, 'r') as stream:
        return measure_from_config(json.load(stream))


def save_measure(mu, path):
    with open(path, 'w') as stream:
        json.dump(mu.to_json(), stream, indent=2)


def _is_atomic(mu):
    if isinstance(mu, AtomicMeasure):
        return True
    if isinstance(mu, DensityMeasure):
        return False
    raise TypeError("Expected AtomicMeasure or DensityMeasure but got {}"
                    .format(emit_cast(mu)))


def ball_mass_array(mu, coords, r):
    """μ(D(z, r)) for each row of coords, for an atomic μ.

    Returns:
        np.ndarray: Shaped like coords without its last axis.
    """
    coords = np.asarray(coords, dtype=complex)
    total = np.zeros(coords.shape[:-1])
    for w, c in zip(mu.coords, mu.weights):
        total += c * (metric_array(coords, w) < r)
    return total


def ball_mass(mu, z, r, rel_tol=None):
    """μ(D(z, r)).

    Atomic measures sum the weights strictly inside the ball. Density
    measures integrate g over the ball.

    Raises:
        ToleranceError: rel_tol is set and the ball rule misses it.
    """
    if not r > 0:
        raise DomainError("r must be positive but got {}".format(r))
    if _is_atomic(mu):
        if not len(mu):
            return 0.0
        coords = z.coords if isinstance(z, SiegelPoint) else z
        return float(ball_mass_array(mu, np.asarray(coords)[None, :], r)[0])
    return ball_integral(mu.evaluate, z, r, rel_tol=rel_tol).value


def admissibility(mu, alpha, spec=None):
    """∫ dμ(z) / |z_n + i|^alpha."""
    if not alpha > 0:
        raise DomainError("alpha must be positive but got {}".format(alpha))
    if _is_atomic(mu):
        if not len(mu):
            return 0.0
        return float(np.sum(mu.weights
                            / np.abs(mu.coords[:, -1] + 1j) ** alpha))
    if spec is None:
        spec = QuadratureSpec(region=mu.support, tail=False)

    def integrand(coords):
        return mu.evaluate(coords) / np.abs(coords[:, -1] + 1j) ** alpha

    return integrate(integrand, spec).value


def density_mass(mu, spec=None):
    """∫ g dV over the support."""
    if spec is None:
        spec = QuadratureSpec(region=mu.support, tail=False)
    return integrate(mu.evaluate, spec).value


def _resolution_counts(resolution, n):
    if isinstance(resolution, (int, np.integer)):
        counts = (int(resolution),) * (2 * n)
    else:
        counts = tuple(int(k) for k in resolution)
    if len(counts) != 2 * n:
        raise DimensionMismatchError(
            "Expected {} per-axis counts but got {}"
            .format(2 * n, len(counts)))
    if min(counts) < 1:
        raise DomainError("Every axis needs at least one cell but got {}"
                          .format(counts))
    return counts


def discretize(mu, resolution):
    """Midpoint-rule atoms for a density measure.

    Args:
        mu (DensityMeasure): Density to discretize.
        resolution (Union[int, Sequence[int]]): Cells per axis, in the
            order (radius_1, angle_1, ..., radius_{n-1}, angle_{n-1},
            Re z_n, h). A single int applies to every axis.

    Returns:
        AtomicMeasure: One atom per cell with positive weight, at the
            cell midpoint, weighing g(midpoint) times the cell volume.
    """
    region = mu.support
    n = region.n
    counts = _resolution_counts(resolution, n)
    axes = []
    for j in range(n - 1):
        radial, angular = counts[2 * j], counts[2 * j + 1]
        edges = region.zprime_radius * np.arange(radial + 1) / radial
        radii = 0.5 * (edges[:-1] + edges[1:])
        step = 2.0 * math.pi / angular
        angles = step * (np.arange(angular) + 0.5)
        nodes = (radii[:, None] * np.exp(1j * angles)[None, :]).reshape(-1)
        areas = np.repeat(0.5 * (edges[1:] ** 2 - edges[:-1] ** 2) * step,
                          angular)
        axes.append((nodes, areas))
    x_count, h_count = counts[-2], counts[-1]
    x_width = 2.0 * region.re_zn_bound / x_count
    xs = -region.re_zn_bound + x_width * (np.arange(x_count) + 0.5)
    h_width = (region.rho_max - region.rho_min) / h_count
    hs = region.rho_min + h_width * (np.arange(h_count) + 0.5)

    zprime = np.zeros((1, n - 1), dtype=complex)
    volumes = np.ones(1)
    for j, (nodes, areas) in enumerate(axes):
        size = zprime.shape[0]
        zprime = np.repeat(zprime, nodes.size, axis=0)
        zprime[:, j] = np.tile(nodes, size)
        volumes = np.repeat(volumes, nodes.size) * np.tile(areas, size)
    chart = np.empty((zprime.shape[0], x_count, h_count, 2 * n))
    chart[..., :n - 1] = zprime.real[:, None, None, :]
    chart[..., n - 1:2 * n - 2] = zprime.imag[:, None, None, :]
    chart[..., -2] = xs[None, :, None]
    chart[..., -1] = hs[None, None, :]
    coords = chart_array(chart.reshape(-1, 2 * n))
    cell = (volumes[:, None, None] * x_width * h_width
            * np.ones((1, x_count, h_count))).reshape(-1)
    # midpoints of the outer cells sit strictly inside the support
    weights = np.asarray(mu.density(coords), dtype=float) * cell
    keep = weights > 0
    logger.debug("Discretized {} into {} of {} cells"
                 .format(mu.label, int(np.sum(keep)), weights.size))
    return AtomicMeasure(zip(coords[keep], weights[keep]), n=n)


def random_atomic_measure(rng, region, max_atoms=50,
                          weight_range=(0.5, 2.0), min_atoms=1):
    """Draw 1..max_atoms atoms uniformly (in chart coordinates) on region."""
    count = int(rng.integers(min_atoms, max_atoms + 1))
    coords = region.sample(rng, count)
    weights = rng.uniform(weight_range[0], weight_range[1], size=count)
    return AtomicMeasure(zip(coords, weights), n=region.n)


def point_mass(point, weight=1.0):
    return AtomicMeasure([(point, weight)])
