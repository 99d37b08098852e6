# -*- coding: utf-8 -*-
"""r-lattices on truncated regions of the Siegel upper half-space.

A lattice here is a greedy maximal r/2-separated set drawn from a
seeded low-discrepancy candidate stream, so it covers its region by
Bergman balls of radius r. Covering is certified by sampling.
"""
from __future__ import annotations
from __future__ import division

import json
import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from scipy.stats import qmc

from siegeltoeplitz import (
    DomainError,
    LatticeConstructionError,
    emit_cast,
)
from siegeltoeplitz.geometry import (
    DomainParams,
    SiegelPoint,
    chart_array,
    invariant_ball_measure,
    kernel_constant,
    metric_array,
    point_from_json,
    point_to_json,
    rho_array,
)

logger = logging.getLogger(__name__)

DEFAULT_COVERING_SAMPLES = 10**5
CANDIDATES_PER_BALL = 64
MIN_CANDIDATES = 2048
MAX_CANDIDATES = 200000
SAMPLE_CHUNK = 4096


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError("{} must be a positive real but got {}"
                          .format(name, emit_cast(value)))
    if not (math.isfinite(value) and value > 0):
        raise DomainError("{} must be a positive real but got {}"
                          .format(name, value))
    return value


@dataclass(frozen=True)
class Region:
    """A chart box {rho_min <= ρ <= rho_max, |Re z_n| <= re_zn_bound,
    |z'_j| <= zprime_radius for every j}.

    zprime_radius is unused when n is 1.
    """
    n: int
    rho_min: float
    rho_max: float
    zprime_radius: float = 1.0
    re_zn_bound: float = 1.0

    def __post_init__(self):
        DomainParams(self.n)
        for name in ("rho_min", "rho_max", "zprime_radius",
                     "re_zn_bound"):
            object.__setattr__(self, name,
                               _positive(name, getattr(self, name)))
        if not self.rho_min < self.rho_max:
            raise DomainError(
                "rho_min must be less than rho_max but got [{}, {}]"
                .format(self.rho_min, self.rho_max))

    @property
    def dimension(self):
        """Real dimension 2n of the chart box."""
        return 2 * self.n

    def contains(self, z):
        z = np.asarray(z.coords if isinstance(z, SiegelPoint) else z,
                       dtype=complex)
        h = rho_array(z)
        inside = ((h >= self.rho_min) & (h <= self.rho_max)
                  & (np.abs(z[..., -1].real) <= self.re_zn_bound))
        if self.n > 1:
            inside &= np.all(np.abs(z[..., :-1]) <= self.zprime_radius,
                             axis=-1)
        return inside

    def _unit_to_chart(self, u, lambda_weighted=False):
        n = self.n
        coords = np.empty((u.shape[0], 2 * n))
        for j in range(n - 1):
            radius = self.zprime_radius * np.sqrt(u[:, 2 * j])
            angle = 2.0 * math.pi * u[:, 2 * j + 1]
            coords[:, j] = radius * np.cos(angle)
            coords[:, n - 1 + j] = radius * np.sin(angle)
        coords[:, -2] = self.re_zn_bound * (2.0 * u[:, -2] - 1.0)
        if lambda_weighted:
            # inverse CDF of the h^{-(n+1)} density on [rho_min, rho_max]
            top = self.rho_min ** (-n)
            bottom = self.rho_max ** (-n)
            coords[:, -1] = (top - u[:, -1] * (top - bottom)) ** (-1.0 / n)
        else:
            coords[:, -1] = (self.rho_min
                             + (self.rho_max - self.rho_min) * u[:, -1])
        return coords

    def sample(self, rng, count):
        """Draw points uniformly in chart coordinates.

        Returns:
            np.ndarray: complex array shaped (count, n).
        """
        u = rng.random((count, 2 * self.n))
        return chart_array(self._unit_to_chart(u))

    def chart_volume(self):
        return (2.0 * self.re_zn_bound * (self.rho_max - self.rho_min)
                * (math.pi * self.zprime_radius ** 2) ** (self.n - 1))

    def lambda_measure(self):
        """λ of the region, in closed form."""
        n = self.n
        height_part = (self.rho_min ** (-n) - self.rho_max ** (-n)) / n
        return (kernel_constant(n) * height_part * 2.0 * self.re_zn_bound
                * (math.pi * self.zprime_radius ** 2) ** (n - 1))

    def scaled(self, s):
        """Shrink or grow the outer bounds the way a dilation δ_√s does.

        rho_min is kept.
        """
        s = _positive("s", s)
        return Region(self.n, self.rho_min, self.rho_max * s,
                      self.zprime_radius * math.sqrt(s),
                      self.re_zn_bound * s)

    def to_json(self):
        return {
            "n": self.n,
            "rho_min": self.rho_min,
            "rho_max": self.rho_max,
            "zprime_radius": self.zprime_radius,
            "re_zn_bound": self.re_zn_bound,
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise DomainError("A region must be a dict but got {}"
                              .format(emit_cast(data)))
        try:
            return cls(
                n=int(data["n"]),
                rho_min=data["rho_min"],
                rho_max=data["rho_max"],
                zprime_radius=data.get("zprime_radius", 1.0),
                re_zn_bound=data.get("re_zn_bound", 1.0),
            )
        except KeyError as ex:
            raise DomainError("Region is missing {}".format(ex))


@dataclass(frozen=True)
class Lattice:
    points: Tuple[SiegelPoint, ...]
    r: float
    region: Region
    coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "r", _positive("r", self.r))
        if self.points:
            coords = np.vstack([p.coords for p in self.points])
        else:
            coords = np.empty((0, self.region.n), dtype=complex)
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.points)

    def without(self, index):
        """Copy of this lattice with one point removed."""
        points = list(self.points)
        del points[index]
        return Lattice(tuple(points), self.r, self.region)

    def to_json(self):
        return {
            "r": self.r,
            "region": self.region.to_json(),
            "points": [point_to_json(p) for p in self.points],
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            points=tuple(point_from_json(p) for p in data["points"]),
            r=data["r"],
            region=Region.from_json(data["region"]),
        )

    def save(self, path):
        with open(path, 'w') as stream:
            json.dump(self.to_json(), stream, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, 'r') as stream:
            return cls.from_json(json.load(stream))


@dataclass(frozen=True)
class SeparatedPartition:
    families: Tuple[Tuple[int, ...], ...]
    R: float

    @property
    def m(self):
        return len(self.families)


@dataclass(frozen=True)
class CoverageReport:
    fraction: float
    worst_gap: float
    worst_sample: Optional[list]
    samples: int
    radius: float

    @property
    def covered(self):
        return self.fraction >= 1.0

    def to_json(self):
        return {
            "fraction": self.fraction,
            "worst_gap": self.worst_gap,
            "worst_sample": self.worst_sample,
            "samples": self.samples,
            "radius": self.radius,
        }


def default_candidate_budget(region, r):
    """Candidates so that each r/4-ball expects about 64 of them."""
    ball = invariant_ball_measure(r / 4.0, region.n)
    budget = int(CANDIDATES_PER_BALL * region.lambda_measure() / ball)
    return max(MIN_CANDIDATES, min(MAX_CANDIDATES, budget))


def candidate_stream(region, count, seed):
    """Scrambled Halton candidates, distributed like λ on the region.

    Returns:
        np.ndarray: complex array shaped (count, n).
    """
    sampler = qmc.Halton(d=2 * region.n, scramble=True, seed=seed)
    u = sampler.random(count)
    return chart_array(region._unit_to_chart(u, lambda_weighted=True))


def lattice_min_separation(lat):
    if len(lat) < 2:
        return math.inf
    coords = lat.coords
    distances = metric_array(coords[:, None, :], coords[None, :, :])
    np.fill_diagonal(distances, math.inf)
    return float(np.min(distances))


def build_lattice(region, r, seed=0, candidates=None,
                  verify_samples=DEFAULT_COVERING_SAMPLES):
    """Build an r-lattice on region.

    Args:
        region (Region): Truncation to cover.
        r (float): Lattice radius; accepted points are r/2-separated.
        seed (int): Seed of the candidate stream and of the covering
            check.
        candidates (int, optional): Candidate budget. Defaults to
            default_candidate_budget(region, r).
        verify_samples (int, optional): Covering samples checked before
            returning. 0 or None skips the check.

    Returns:
        Lattice: Points in acceptance order.

    Raises:
        LatticeConstructionError: A covering sample is farther than r
            from every accepted point.
    """
    r = _positive("r", r)
    if candidates is None:
        candidates = default_candidate_budget(region, r)
    stream = candidate_stream(region, int(candidates), seed)
    accepted = np.empty_like(stream)
    count = 0
    half = r / 2.0
    for z in stream:
        if count == 0 or np.min(metric_array(z, accepted[:count])) >= half:
            accepted[count] = z
            count += 1
    lat = Lattice(tuple(SiegelPoint(c) for c in accepted[:count]), r,
                  region)
    logger.info("Accepted {} of {} candidates (r={}, seed={})"
                .format(count, candidates, r, seed))
    if verify_samples:
        report = verify_covering(lat, verify_samples, seed)
        if not report.covered:
            raise LatticeConstructionError(
                "Candidate budget {} left {} uncovered (gap {:.4f} > r={})"
                .format(candidates, report.worst_sample,
                        report.worst_gap, r),
                sample=report.worst_sample,
            )
    return lat


def _nearest_distances(lat, points):
    if len(lat) == 0:
        return np.full(points.shape[0], math.inf)
    return np.min(metric_array(points[:, None, :], lat.coords[None, :, :]),
                  axis=1)


def verify_covering(lat, samples=DEFAULT_COVERING_SAMPLES, seed=0,
                    threads=1):
    """Fraction of uniform region samples within distance r of the lattice.

    Returns:
        CoverageReport: fraction, worst gap distance, and the sample that
            attains the worst gap.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    points = lat.region.sample(rng, int(samples))
    chunks = [points[i:i + SAMPLE_CHUNK]
              for i in range(0, points.shape[0], SAMPLE_CHUNK)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(
                lambda chunk: _nearest_distances(lat, chunk), chunks))
    else:
        parts = [_nearest_distances(lat, chunk) for chunk in chunks]
    nearest = np.concatenate(parts)
    worst = int(np.argmax(nearest))
    return CoverageReport(
        fraction=float(np.mean(nearest < lat.r)),
        worst_gap=float(nearest[worst]),
        worst_sample=point_to_json(points[worst]),
        samples=int(samples),
        radius=lat.r,
    )


def overlap_count(lat, R, samples=10**4, seed=0):
    """Largest number of balls D(a_k, R) sharing a sampled point.

    The lattice points themselves are always among the samples.
    """
    R = _positive("R", R)
    if len(lat) == 0:
        return 0
    rng = np.random.default_rng(seed)
    points = np.concatenate([lat.coords,
                             lat.region.sample(rng, int(samples))])
    best = 0
    for i in range(0, points.shape[0], SAMPLE_CHUNK):
        chunk = points[i:i + SAMPLE_CHUNK]
        inside = metric_array(chunk[:, None, :],
                              lat.coords[None, :, :]) < R
        best = max(best, int(np.max(np.sum(inside, axis=1))))
    return best


def partition_separated(lat, R):
    """Greedy coloring of the conflict graph {β(a_i, a_j) <= R}.

    Returns:
        SeparatedPartition: Families whose members are pairwise farther
            apart than R.
    """
    R = _positive("R", R)
    m = len(lat)
    if m == 0:
        return SeparatedPartition((), R)
    coords = lat.coords
    conflict = metric_array(coords[:, None, :], coords[None, :, :]) <= R
    np.fill_diagonal(conflict, False)
    colors = np.full(m, -1, dtype=int)
    for i in range(m):
        used = set(colors[conflict[i] & (colors >= 0)].tolist())
        color = 0
        while color in used:
            color += 1
        colors[i] = color
    families = tuple(tuple(np.flatnonzero(colors == c).tolist())
                     for c in range(int(colors.max()) + 1))
    logger.debug("Partitioned {} points into {} families (R={})"
                 .format(m, len(families), R))
    return SeparatedPartition(families, R)
