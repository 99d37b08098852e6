# -*- coding: utf-8 -*-
"""Closed-form geometry of the Siegel upper half-space.

A point z = (z', z_n) of C^n lies in the domain when
rho(z) = Im z_n - |z'|^2 > 0. Points are stored as complex coordinate
arrays. Functions ending in ``_array`` broadcast over the leading axes
of arrays shaped (..., n) and do no membership checks; the other
functions take SiegelPoint instances (or plain coordinates).

Chart coordinates are (x'_1..x'_{n-1}, y'_1..y'_{n-1}, x_n, h) with
z' = x' + iy' and z_n = x_n + i(h + |z'|^2), so that rho(z) = h and
the chart has unit Jacobian.
"""
from __future__ import annotations
from __future__ import division

import logging
import math

from dataclasses import dataclass

import numpy as np

from siegeltoeplitz import (
    DimensionMismatchError,
    DomainError,
    MetricConsistencyError,
    emit_cast,
)

logger = logging.getLogger(__name__)

RHO_FLOOR = 1e-14
METRIC_RADICAND_TOLERANCE = 1e-12
_BELOW_ONE = float(np.nextafter(1.0, 0.0))
MONTE_CARLO_CHUNK = 1 << 16


def kernel_constant(n):
    """n!/(4π^n), the factor in front of the Bergman kernel."""
    return math.factorial(n) / (4.0 * math.pi ** n)


@dataclass(frozen=True)
class DomainParams:
    n: int = 1

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise DomainError("n must be int but got {}"
                              .format(emit_cast(self.n)))
        if self.n < 1:
            raise DomainError("n must be at least 1 but got {}"
                              .format(self.n))

    @property
    def kernel_constant(self):
        return kernel_constant(self.n)


class SiegelPoint:
    """An immutable point of the Siegel upper half-space.

    Args:
        coords (Sequence[complex]): n complex numbers; the last one is
            z_n and the others are z'.

    Raises:
        DomainError: rho(z) <= 1e-14 or there are no coordinates.
    """
    __slots__ = ("_coords",)

    def __init__(self, coords):
        arr = np.array(coords, dtype=complex).reshape(-1)
        if arr.size < 1:
            raise DomainError("A point needs at least one coordinate.")
        height = float(rho_array(arr))
        if not height > RHO_FLOOR:
            raise DomainError(
                "{} is not in the domain (rho={})"
                .format(arr.tolist(), height))
        arr.flags.writeable = False
        self._coords = arr

    @classmethod
    def i(cls, n=1):
        """The distinguished point (0', i)."""
        DomainParams(n)
        coords = np.zeros(n, dtype=complex)
        coords[-1] = 1j
        return cls(coords)

    @property
    def coords(self):
        return self._coords

    @property
    def n(self):
        return self._coords.size

    @property
    def zprime(self):
        return self._coords[:-1]

    @property
    def zn(self):
        return complex(self._coords[-1])

    @property
    def rho(self):
        return float(rho_array(self._coords))

    def to_json(self):
        return point_to_json(self)

    @classmethod
    def from_json(cls, data):
        return point_from_json(data)

    def __eq__(self, other):
        if not isinstance(other, SiegelPoint):
            return NotImplemented
        return np.array_equal(self._coords, other._coords)

    def __hash__(self):
        return hash(tuple(self._coords.tolist()))

    def __repr__(self):
        return "SiegelPoint({})".format(self._coords.tolist())


def point_to_json(z):
    """Serialize a point as a list of [re, im] pairs."""
    return [[float(c.real), float(c.imag)] for c in _as_array(z)]


def point_from_json(data):
    if not isinstance(data, list) or not data:
        raise DomainError("A point must be a nonempty list of [re, im]"
                          " pairs but got {}".format(emit_cast(data)))
    coords = []
    for pair in data:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise DomainError("Expected [re, im] but got {}"
                              .format(emit_cast(pair)))
        coords.append(complex(float(pair[0]), float(pair[1])))
    return SiegelPoint(coords)


def _as_array(z):
    if isinstance(z, SiegelPoint):
        return z.coords
    return np.asarray(z, dtype=complex)


def _check_same_dimension(z, w):
    if z.shape[-1] != w.shape[-1]:
        raise DimensionMismatchError(
            "Points have dimensions {} and {}"
            .format(z.shape[-1], w.shape[-1]))


def rho_form_array(z, w):
    z = _as_array(z)
    w = _as_array(w)
    _check_same_dimension(z, w)
    result = 0.5j * (np.conj(w[..., -1]) - z[..., -1])
    if z.shape[-1] > 1:
        result = result - np.sum(z[..., :-1] * np.conj(w[..., :-1]),
                                 axis=-1)
    return result


def rho_array(z):
    z = _as_array(z)
    result = z[..., -1].imag
    if z.shape[-1] > 1:
        zp = z[..., :-1]
        result = result - np.sum(zp.real ** 2 + zp.imag ** 2, axis=-1)
    return result


def kernel_array(z, w):
    z = _as_array(z)
    n = z.shape[-1]
    # integer power, so no branch choice is involved
    return kernel_constant(n) * rho_form_array(z, w) ** (-(n + 1))


def invariant_density_array(z):
    z = _as_array(z)
    n = z.shape[-1]
    return kernel_constant(n) * rho_array(z) ** (-(n + 1))


def metric_array(z, w):
    """Bergman metric β(z, w) = atanh √(1 − ρ(z)ρ(w)/|ρ(z,w)|²).

    Raises:
        MetricConsistencyError: The radicand leaves [0, 1] by more than
            1e-12, which means an input is not in the domain.
    """
    z = _as_array(z)
    w = _as_array(w)
    rzw = rho_form_array(z, w)
    radicand = 1.0 - rho_array(z) * rho_array(w) / (rzw.real ** 2
                                                     + rzw.imag ** 2)
    radicand = np.asarray(radicand, dtype=float)
    if radicand.size:
        low = float(np.min(radicand))
        high = float(np.max(radicand))
        if (low < -METRIC_RADICAND_TOLERANCE
                or high > 1.0 + METRIC_RADICAND_TOLERANCE
                or not math.isfinite(low) or not math.isfinite(high)):
            raise MetricConsistencyError(
                "Metric radicand range [{}, {}] is outside [0, 1]"
                .format(low, high))
        if low < 0.0 or high > 1.0:
            logger.warning("Clamped metric radicand range [{!r}, {!r}]"
                           " into [0, 1]".format(low, high))
    radicand = np.clip(radicand, 0.0, _BELOW_ONE)
    return np.arctanh(np.sqrt(radicand))


def rho_form(z, w):
    """ρ(z,w) = (i/2)(conj(w_n) − z_n) − z'·conj(w').

    Args:
        z (Union[SiegelPoint, Sequence[complex]]): First point.
        w (Union[SiegelPoint, Sequence[complex]]): Second point.

    Returns:
        complex: ρ(z, w).

    Raises:
        DimensionMismatchError: z and w have different dimensions.
    """
    return complex(rho_form_array(z, w))


def rho(z):
    return float(rho_array(z))


def bergman_kernel(z, w):
    return complex(kernel_array(z, w))


def normalized_kernel(z, w):
    """k_z(w) = K(z, w) / √K(z, z)."""
    return bergman_kernel(z, w) / math.sqrt(invariant_density(z))


def bergman_metric(z, w):
    return float(metric_array(z, w))


def invariant_density(z):
    """K(z, z), the density of the invariant measure dλ = K(z,z) dV."""
    return float(invariant_density_array(z))


def _check_positive(name, value):
    if isinstance(value, bool) or not (
            isinstance(value, (int, float, np.integer, np.floating))
            and math.isfinite(value) and value > 0):
        raise DomainError("{} must be a positive real but got {}"
                          .format(name, emit_cast(value)))
    return float(value)


def dilate_array(t, u):
    u = np.array(_as_array(u), dtype=complex)
    u[..., :-1] *= t
    u[..., -1] *= t * t
    return u


def translate_array(z, u):
    """h_z(u) = (u' − z', u_n − Re z_n − 2i u'·conj(z') + i|z'|²)."""
    z = _as_array(z)
    u = _as_array(u)
    _check_same_dimension(z, u)
    out = np.array(u, dtype=complex)
    zp = z[:-1]
    shift = -z[-1].real + 1j * float(np.sum(zp.real ** 2 + zp.imag ** 2))
    if zp.size:
        out[..., :-1] = u[..., :-1] - zp
        out[..., -1] = (u[..., -1] + shift
                        - 2j * np.sum(u[..., :-1] * np.conj(zp), axis=-1))
    else:
        out[..., -1] = u[..., -1] + shift
    return out


def inverse_translate_array(z, v):
    """h_z^{-1}(v) = (v' + z', v_n + Re z_n + 2i v'·conj(z') + i|z'|²)."""
    z = _as_array(z)
    v = _as_array(v)
    _check_same_dimension(z, v)
    out = np.array(v, dtype=complex)
    zp = z[:-1]
    shift = z[-1].real + 1j * float(np.sum(zp.real ** 2 + zp.imag ** 2))
    if zp.size:
        out[..., -1] = (v[..., -1] + shift
                        + 2j * np.sum(v[..., :-1] * np.conj(zp), axis=-1))
        out[..., :-1] = v[..., :-1] + zp
    else:
        out[..., -1] = v[..., -1] + shift
    return out


def automorphism_array(z, u):
    return dilate_array(1.0 / math.sqrt(rho(z)), translate_array(z, u))


def inverse_automorphism_array(z, v):
    return inverse_translate_array(z, dilate_array(math.sqrt(rho(z)), v))


def dilate(t, u):
    """δ_t(u) = (t u', t² u_n)."""
    t = _check_positive("t", t)
    return SiegelPoint(dilate_array(t, u))


def translate(z, u):
    return SiegelPoint(translate_array(z, u))


def inverse_translate(z, v):
    return SiegelPoint(inverse_translate_array(z, v))


def automorphism(z, u):
    """σ_z(u) = δ_{ρ(z)^{-1/2}}(h_z(u)); σ_z(z) is (0', i)."""
    return SiegelPoint(automorphism_array(z, u))


def inverse_automorphism(z, v):
    return SiegelPoint(inverse_automorphism_array(z, v))


def ball_volume_array(rho_values, r, n):
    t = math.tanh(r)
    factor = (t ** (2 * n)) / ((1.0 - t * t) ** (n + 1)
                                * kernel_constant(n))
    return factor * np.asarray(rho_values, dtype=float) ** (n + 1)


def ball_volume(z, r):
    """Euclidean volume of the Bergman ball D(z, r).

    Args:
        z (SiegelPoint): Center.
        r (float): Positive radius.

    Returns:
        float: (4π^n/n!) tanh^{2n}r / (1 − tanh²r)^{n+1} · ρ(z)^{n+1}
    """
    r = _check_positive("r", r)
    z = _as_array(z)
    return float(ball_volume_array(rho_array(z), r, z.shape[-1]))


def invariant_ball_measure(r, n):
    """λ(D(z, r)), which is sinh^{2n}(r) for every center z."""
    r = _check_positive("r", r)
    return math.sinh(r) ** (2 * n)


def distortion_bounds(r):
    """Bounds on |ρ(z,u)|/|ρ(z,v)| whenever β(u, v) <= r."""
    t = math.tanh(_check_positive("r", r))
    return (1.0 - t) / (1.0 + t), (1.0 + t) / (1.0 - t)


def chart_array(coords):
    coords = np.asarray(coords, dtype=float)
    size = coords.shape[-1]
    if size < 2 or size % 2:
        raise DimensionMismatchError(
            "Chart coordinates come in 2n reals but got {}".format(size))
    n = size // 2
    out = np.empty(coords.shape[:-1] + (n,), dtype=complex)
    x_prime = coords[..., :n - 1]
    y_prime = coords[..., n - 1:2 * n - 2]
    out[..., :-1] = x_prime + 1j * y_prime
    height = coords[..., -1] + np.sum(x_prime ** 2 + y_prime ** 2, axis=-1)
    out[..., -1] = coords[..., -2] + 1j * height
    return out


def inverse_chart_array(z):
    z = _as_array(z)
    n = z.shape[-1]
    out = np.empty(z.shape[:-1] + (2 * n,), dtype=float)
    out[..., :n - 1] = z[..., :-1].real
    out[..., n - 1:2 * n - 2] = z[..., :-1].imag
    out[..., -2] = z[..., -1].real
    out[..., -1] = rho_array(z)
    return out


def chart(coords):
    """Map chart coordinates (x', y', x_n, h) to a point.

    Args:
        coords (Sequence[float]): 2n reals ending with h > 0.

    Returns:
        SiegelPoint: The point with rho equal to h.
    """
    coords = np.asarray(coords, dtype=float).reshape(-1)
    if coords.size and not coords[-1] > 0:
        raise DomainError("h must be positive but got {}"
                          .format(coords[-1]))
    return SiegelPoint(chart_array(coords))


def inverse_chart(z):
    return inverse_chart_array(z)


def ball_chart_box(z, r):
    """Chart box containing D(z, r).

    Returns:
        tuple(np.ndarray): (low, high), each of length 2n.
    """
    r = _check_positive("r", r)
    z = _as_array(z)
    n = z.shape[-1]
    t = math.tanh(r)
    height = float(rho_array(z))
    root = math.sqrt(height)
    # D((0', i), r) in its own chart coordinates:
    zprime_reach = t / math.sqrt(1.0 - t * t)
    x_reach = 2.0 * t / (1.0 - t * t)
    low = np.empty(2 * n)
    high = np.empty(2 * n)
    reach = root * zprime_reach
    low[:n - 1] = z[:-1].real - reach
    high[:n - 1] = z[:-1].real + reach
    low[n - 1:2 * n - 2] = z[:-1].imag - reach
    high[n - 1:2 * n - 2] = z[:-1].imag + reach
    zprime_norm = float(np.sqrt(np.sum(np.abs(z[:-1]) ** 2)))
    x_span = height * x_reach + 2.0 * reach * zprime_norm
    low[-2] = z[-1].real - x_span
    high[-2] = z[-1].real + x_span
    low[-1] = height * (1.0 - t) / (1.0 + t)
    high[-1] = height * (1.0 + t) / (1.0 - t)
    return low, high


def _monte_carlo_ball(z, r, samples, seed, weighted):
    r = _check_positive("r", r)
    if samples < 1:
        raise DomainError("samples must be at least 1")
    z = _as_array(z)
    low, high = ball_chart_box(z, r)
    box_volume = float(np.prod(high - low))
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        count = min(MONTE_CARLO_CHUNK, samples - done)
        u = rng.uniform(low, high, size=(count, low.size))
        points = chart_array(u)
        values = (metric_array(z, points) < r).astype(float)
        if weighted:
            values *= invariant_density_array(points)
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        done += count
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return box_volume * mean, box_volume * math.sqrt(variance / samples)


def monte_carlo_ball_volume(z, r, samples=10**6, seed=0):
    """Rejection-sampling estimate of |D(z, r)|.

    Returns:
        tuple(float): (estimate, standard error)
    """
    return _monte_carlo_ball(z, r, samples, seed, weighted=False)


def monte_carlo_ball_lambda(z, r, samples=10**6, seed=0):
    """Rejection-sampling estimate of λ(D(z, r)) = ∫_D K(w,w) dV(w).

    Returns:
        tuple(float): (estimate, standard error)
    """
    return _monte_carlo_ball(z, r, samples, seed, weighted=True)


def random_points(rng, n, count, rho_range=(0.1, 10.0), re_bound=5.0,
                  zprime_bound=2.0):
    """Draw points with log-uniform height for identity checks.

    Returns:
        np.ndarray: complex array shaped (count, n).
    """
    coords = np.empty((count, 2 * n))
    coords[:, :2 * n - 2] = rng.uniform(-zprime_bound, zprime_bound,
                                        size=(count, 2 * n - 2))
    coords[:, -2] = rng.uniform(-re_bound, re_bound, size=count)
    log_low, log_high = math.log(rho_range[0]), math.log(rho_range[1])
    coords[:, -1] = np.exp(rng.uniform(log_low, log_high, size=count))
    return chart_array(coords)
