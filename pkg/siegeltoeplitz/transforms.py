# -*- coding: utf-8 -*-
"""Averaging functions, Berezin transforms and L^p(dλ) norms.

Fields (μ̂_r, μ̃, constants) are vectorized ScalarField objects, so the
same code evaluates them at one point or on a whole quadrature chunk.
"""
from __future__ import annotations
from __future__ import division

import logging
import math

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from siegeltoeplitz import (
    DivergentParametersError,
    DomainError,
    emit_cast,
)
from siegeltoeplitz.geometry import (
    SiegelPoint,
    ball_volume,
    ball_volume_array,
    invariant_density_array,
    kernel_array,
    rho,
    rho_array,
    rho_form_array,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import (
    AtomicMeasure,
    DensityMeasure,
    ball_mass,
    ball_mass_array,
)
from siegeltoeplitz.quadrature import (
    QuadratureResult,
    QuadratureSpec,
    ball_integral,
    integrate,
)
from siegeltoeplitz.special import log_gamma

logger = logging.getLogger(__name__)

KEYLEMMA_TAIL = 1e-4
KEYLEMMA_OUTER = (2**6, 2**30)
KEYLEMMA_INNER = (2.0**-40, 2.0**-6)


@dataclass(frozen=True)
class ScalarField:
    """A nonnegative function on the domain.

    Args:
        evaluator (Callable): Vectorized map from complex arrays (m, n)
            to m values.
        label (str): Name used in reports, such as "berezin".
    """
    evaluator: Callable
    label: str

    def evaluate(self, coords):
        return np.asarray(self.evaluator(np.asarray(coords, dtype=complex)),
                          dtype=float)

    def __call__(self, z):
        coords = z.coords if isinstance(z, SiegelPoint) else np.asarray(z)
        return float(self.evaluate(coords[None, :])[0])


def _point_coords(z):
    return z.coords if isinstance(z, SiegelPoint) else np.asarray(
        z, dtype=complex)


def _berezin_atomic_array(mu, coords):
    total = np.zeros(coords.shape[:-1])
    for w, c in zip(mu.coords, mu.weights):
        total += c * np.abs(kernel_array(coords, w)) ** 2
    return total / invariant_density_array(coords)


def berezin_transform(mu, z, spec=None):
    """μ̃(z) = ∫ |k_z(w)|² dμ(w).

    Atomic measures give an exact finite sum. Density measures are
    integrated over their support.

    Raises:
        ToleranceError: The density quadrature missed spec.rel_tol.
    """
    return berezin_result(mu, z, spec).value


def berezin_result(mu, z, spec=None):
    """berezin_transform with its error and tail estimates."""
    coords = _point_coords(z)
    if isinstance(mu, AtomicMeasure):
        if not len(mu):
            return QuadratureResult(0.0, 0.0)
        value = float(_berezin_atomic_array(mu, coords[None, :])[0])
        return QuadratureResult(value, 0.0)
    if not isinstance(mu, DensityMeasure):
        raise TypeError("Expected a measure but got {}"
                        .format(emit_cast(mu)))
    if spec is None:
        spec = QuadratureSpec(region=mu.support, tail=False)
    diagonal = float(invariant_density_array(coords))

    def integrand(points):
        return (mu.evaluate(points)
                * np.abs(kernel_array(points, coords)) ** 2 / diagonal)

    return integrate(integrand, spec)


def averaging_function(mu, z, r, rel_tol=None):
    """μ̂_r(z) = μ(D(z, r)) / |D(z, r)|."""
    return ball_mass(mu, z, r, rel_tol=rel_tol) / ball_volume(z, r)


def berezin_field(mu, spec=None):
    if isinstance(mu, AtomicMeasure):
        if not len(mu):
            return constant_field(0.0, "berezin")
        return ScalarField(lambda coords: _berezin_atomic_array(mu, coords),
                           "berezin")

    def evaluate(coords):
        flat = coords.reshape(-1, coords.shape[-1])
        values = [berezin_transform(mu, row, spec) for row in flat]
        return np.array(values).reshape(coords.shape[:-1])

    return ScalarField(evaluate, "berezin")


def averaging_field(mu, r):
    if not r > 0:
        raise DomainError("r must be positive but got {}".format(r))
    if isinstance(mu, AtomicMeasure):
        if not len(mu):
            return constant_field(0.0, "averaging")
        n = mu.n

        def evaluate(coords):
            volumes = ball_volume_array(rho_array(coords), r, n)
            return ball_mass_array(mu, coords, r) / volumes

        return ScalarField(evaluate, "averaging")

    def evaluate_density(coords):
        flat = coords.reshape(-1, coords.shape[-1])
        values = [averaging_function(mu, row, r) for row in flat]
        return np.array(values).reshape(coords.shape[:-1])

    return ScalarField(evaluate_density, "averaging")


def constant_field(c, label="constant"):
    c = float(c)
    if not c >= 0:
        raise DomainError("A field must be nonnegative but got {}"
                          .format(c))
    return ScalarField(lambda coords: np.full(coords.shape[:-1], c), label)


@dataclass(frozen=True)
class NormEstimate:
    """(∫ F^p dλ)^{1/p} over a truncation.

    error_estimate and tail_estimate are in units of the norm; integral
    holds the underlying ∫ F^p dλ.
    """
    value: float
    error_estimate: float
    tail_estimate: Optional[float]
    integral: QuadratureResult
    p: float

    def to_json(self):
        return {
            "p": self.p,
            "value": self.value,
            "error_estimate": self.error_estimate,
            "tail_estimate": self.tail_estimate,
            "integral": self.integral.to_json(),
        }


def _check_p(p):
    if isinstance(p, bool) or not (isinstance(p, (int, float))
                                   and math.isfinite(p) and p > 0):
        raise DomainError("p must be a positive real but got {}"
                          .format(emit_cast(p)))
    return float(p)


def lp_lambda_norm(field, p, spec):
    """‖F‖ in L^p(dλ) over spec.region.

    Raises:
        ToleranceError: Refinement ran out before spec.rel_tol; the error
            carries the last two estimates of ∫ F^p dλ.
    """
    p = _check_p(p)

    def integrand(coords):
        return field.evaluate(coords) ** p * invariant_density_array(coords)

    result = integrate(integrand, spec)
    value = max(result.value, 0.0) ** (1.0 / p)
    if result.value > 0:
        error = result.error_estimate * value / (p * result.value)
    else:
        error = 0.0
    tail = result.tail_estimate
    if tail is not None and math.isfinite(tail):
        tail = max(result.value + tail, 0.0) ** (1.0 / p) - value
    return NormEstimate(value, error, tail, result, p)


def averaging_lp_norm(mu, r, p, spec, delta=None):
    """‖μ̂_δ‖ in L^p(dλ); delta defaults to r."""
    return lp_lambda_norm(averaging_field(mu, r if delta is None else delta),
                          p, spec)


def lattice_lp_sum(mu, lat, p):
    """(Σ_k μ̂_r(a_k)^p)^{1/p} with r the lattice radius."""
    p = _check_p(p)
    if len(lat) == 0:
        return 0.0
    if isinstance(mu, AtomicMeasure):
        values = averaging_field(mu, lat.r).evaluate(lat.coords)
    else:
        values = np.array([averaging_function(mu, a, lat.r)
                           for a in lat.points])
    values = values[values > 0]
    if not values.size:
        return 0.0
    return float(np.sum(values ** p)) ** (1.0 / p)


def check_keylemma_parameters(n, s, t):
    if not t > -1:
        raise DivergentParametersError(
            "The integral diverges unless t > -1 (got t={})".format(t))
    if not s - t > n + 1:
        raise DivergentParametersError(
            "The integral diverges unless s - t > n + 1 (got s={}, t={},"
            " n={})".format(s, t, n))


def keylemma_constant(n, s, t):
    """C(n, s, t) = 4πⁿ Γ(1+t) Γ(s−t−n−1) / Γ(s/2)².

    Raises:
        DivergentParametersError: t <= -1 or s - t <= n + 1.
    """
    check_keylemma_parameters(n, s, t)
    logs = (log_gamma(1.0 + t) + log_gamma(s - t - n - 1.0)
            - 2.0 * log_gamma(0.5 * s))
    return 4.0 * math.pi ** n * math.exp(logs)


def _power_of_two(value, bounds):
    exponent = math.ceil(math.log2(value))
    return min(max(2.0 ** exponent, bounds[0]), bounds[1])


def keylemma_region(z, s, t):
    """Truncation for the key integral at z.

    Both the outer remainder (decaying like L^{-(s-t-n-1)}) and the
    inner slab below ε (like ε^{1+t}) are sized under 1e-4, with L and ε
    powers of two, then scaled by ρ(z).
    """
    coords = _point_coords(z)
    n = coords.shape[-1]
    check_keylemma_parameters(n, s, t)
    height = rho(coords)
    outer = _power_of_two(KEYLEMMA_TAIL ** (-1.0 / (s - t - n - 1.0)),
                          KEYLEMMA_OUTER)
    inner = 1.0 / _power_of_two(KEYLEMMA_TAIL ** (-1.0 / (1.0 + t)),
                                (1.0 / KEYLEMMA_INNER[1],
                                 1.0 / KEYLEMMA_INNER[0]))
    zprime = float(np.max(np.abs(coords[:-1]))) if n > 1 else 0.0
    return Region(
        n=n,
        rho_min=height * inner,
        rho_max=height * outer,
        zprime_radius=math.sqrt(height * outer) + zprime,
        re_zn_bound=height * outer + abs(coords[-1].real),
    )


def keylemma_spec(z, s, t, **settings):
    """QuadratureSpec on keylemma_region with its core scaled by ρ(z)."""
    height = rho(_point_coords(z))
    settings.setdefault("core", 2.0 * height)
    settings.setdefault("core_step", 0.25 * height)
    return QuadratureSpec(region=keylemma_region(z, s, t), **settings)


@dataclass(frozen=True)
class KeyLemmaResult:
    n: int
    s: float
    t: float
    point: list
    numeric: float
    closed_form: float
    error_estimate: float
    tail_estimate: Optional[float]
    region: Region

    @property
    def corrected(self):
        tail = self.tail_estimate
        if tail is None or not math.isfinite(tail):
            return self.numeric
        return self.numeric + tail

    @property
    def ratio(self):
        return self.corrected / self.closed_form

    def agrees(self, rel_tol):
        return abs(self.ratio - 1.0) <= rel_tol

    def to_json(self):
        return {
            "n": self.n,
            "s": self.s,
            "t": self.t,
            "point": self.point,
            "numeric": self.numeric,
            "closed_form": self.closed_form,
            "ratio": self.ratio,
            "error_estimate": self.error_estimate,
            "tail_estimate": self.tail_estimate,
            "region": self.region.to_json(),
        }


def keylemma_check(z, s, t, spec=None):
    """∫ ρ(w)^t / |ρ(z,w)|^s dV(w) against C(n,s,t) / ρ(z)^{s-t-n-1}.

    Raises:
        DivergentParametersError: The parameters are in the +∞ branch.
    """
    coords = _point_coords(z)
    n = coords.shape[-1]
    closed = keylemma_constant(n, s, t) / rho(coords) ** (s - t - n - 1)
    if spec is None:
        spec = keylemma_spec(z, s, t)

    def integrand(points):
        return (rho_array(points) ** t
                / np.abs(rho_form_array(coords, points)) ** s)

    result = integrate(integrand, spec)
    logger.info("key integral n={} s={} t={}: {!r} vs {!r}"
                .format(n, s, t, result.value, closed))
    return KeyLemmaResult(
        n=n, s=float(s), t=float(t),
        point=[[float(c.real), float(c.imag)] for c in coords],
        numeric=result.value, closed_form=closed,
        error_estimate=result.error_estimate,
        tail_estimate=result.tail_estimate, region=spec.region,
    )


def volume_berezin(z, spec=None):
    """Berezin transform of Lebesgue measure dV at z.

    This is ‖k_z‖² = 1, computed as ρ(z)^{n+1} n!/(4πⁿ) times the
    numeric key integral with s = 2(n+1), t = 0 (tail included).

    Returns:
        tuple(float, KeyLemmaResult): The value and the integral behind it.
    """
    coords = _point_coords(z)
    n = coords.shape[-1]
    check = keylemma_check(z, 2.0 * (n + 1), 0.0, spec)
    scale = (math.exp(log_gamma(n + 1)) / (4.0 * math.pi ** n)
             * rho(coords) ** (n + 1))
    return check.corrected * scale, check


def domination_constant(r, n):
    """C(r, n) with μ̂_r(z) <= C(r, n) μ̃(z) for every z and μ."""
    t = math.tanh(r)
    return ((1.0 - t * t) ** (n + 1) / t ** (2 * n)
            * ((1.0 + t) / (1.0 - t)) ** (2 * (n + 1)))


def subharmonic_ratio(w, z, r, p, order=16):
    """|K_w(z)|^p ρ(z)^{n+1} / ∫_{D(z,r)} |K_w|^p dV."""
    p = _check_p(p)
    w_coords = _point_coords(w)
    z_coords = _point_coords(z)
    n = z_coords.shape[-1]
    top = abs(complex(kernel_array(z_coords, w_coords))) ** p
    bottom = ball_integral(
        lambda u: np.abs(kernel_array(u, w_coords)) ** p,
        z_coords, r, order=order).value
    return top * rho(z_coords) ** (n + 1) / bottom
