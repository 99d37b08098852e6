# -*- coding: utf-8 -*-
"""Exact spectra of Toeplitz operators with atomic symbols.

For μ = Σ_j c_j δ_{w_j}, T_μ = Σ_j c_j ⟨·, K_{w_j}⟩ K_{w_j} = A A* with
A e_j = √c_j K_{w_j}, so its nonzero spectrum is that of the Gram matrix
A* A = [√(c_i c_j) K(w_i, w_j)].
"""
from __future__ import annotations
from __future__ import division

import logging
import math

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from siegeltoeplitz import (
    DomainError,
    EigensolveError,
    emit_cast,
)
from siegeltoeplitz.geometry import (
    SiegelPoint,
    ball_volume_array,
    invariant_density_array,
    kernel_array,
    rho_array,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import (
    AtomicMeasure,
    DensityMeasure,
    discretize,
)
from siegeltoeplitz.quadrature import (
    QuadratureSpec,
    ball_integral,
    integrate,
)
from siegeltoeplitz.transforms import (
    berezin_field,
    berezin_transform,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-12
PSD_CLAMP = 1e-10
POWER_SLACK = 1e-10
UNITARY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ToeplitzGram:
    matrix: np.ndarray
    measure: AtomicMeasure
    hermitian_defect: float = 0.0

    @property
    def size(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a ToeplitzGram, descending and nonnegative.

    Attributes:
        eigenvalues (np.ndarray): One per atom.
        vectors (np.ndarray): Columns match eigenvalues.
        clamped (int): Negative eigenvalues (all within 1e-10 of zero
            relative to the spectral radius) that were set to 0.
        spectral_radius (float): Largest |eigenvalue| before clamping.
        backward_error (float): ‖G V − V Λ‖ / ‖G‖ in the max norm.
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray
    clamped: int = 0
    spectral_radius: float = 0.0
    backward_error: float = 0.0

    def __len__(self):
        return self.eigenvalues.size

    def trace(self):
        return float(np.sum(self.eigenvalues))


def gram_matrix(mu):
    """Hermitian Gram matrix [√(c_i c_j) K(w_i, w_j)] in atom order.

    Raises:
        DomainError: mu has no atoms.
        EigensolveError: The assembled matrix is not Hermitian to 1e-12.
    """
    if not isinstance(mu, AtomicMeasure):
        raise TypeError("Gram matrices need an AtomicMeasure but got {}"
                        .format(emit_cast(mu)))
    if not len(mu):
        raise DomainError("A Gram matrix needs at least one atom.")
    coords = mu.coords
    root = np.sqrt(mu.weights)
    matrix = (root[:, None]
              * kernel_array(coords[:, None, :], coords[None, :, :])
              * root[None, :])
    scale = float(np.max(np.abs(matrix)))
    defect = float(np.max(np.abs(matrix - matrix.conj().T))) / scale
    if defect > HERMITIAN_TOLERANCE:
        raise EigensolveError("Gram matrix is not Hermitian (defect {:.2e})"
                              .format(defect))
    matrix = 0.5 * (matrix + matrix.conj().T)
    matrix.flags.writeable = False
    return ToeplitzGram(matrix, mu, defect)


def spectrum(g):
    """Eigendecomposition of g with the PSD clamp applied.

    Raises:
        EigensolveError: The solver failed, or an eigenvalue is below
            -1e-10 times the spectral radius.
    """
    try:
        values, vectors = np.linalg.eigh(g.matrix)
    except np.linalg.LinAlgError as ex:
        raise EigensolveError("eigh failed: {}".format(ex))
    radius = float(np.max(np.abs(values))) if values.size else 0.0
    threshold = PSD_CLAMP * radius
    if values.size and values[0] < -threshold:
        raise EigensolveError(
            "Gram eigenvalue {!r} is below -{} x spectral radius {!r}"
            .format(float(values[0]), PSD_CLAMP, radius))
    residual = g.matrix @ vectors - vectors * values[None, :]
    backward = (float(np.max(np.abs(residual))) / radius
                if radius else 0.0)
    negative = values < 0
    clamped = int(np.sum(negative))
    if clamped:
        logger.warning("Clamped {} negative Gram eigenvalues (worst {!r})"
                       .format(clamped, float(values[0])))
    values = np.where(negative, 0.0, values)
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    vectors = vectors[:, order]
    values.flags.writeable = False
    vectors.flags.writeable = False
    return Spectrum(values, vectors, clamped, radius, backward)


def _check_p(p, least=0.0):
    if isinstance(p, bool) or not (isinstance(p, (int, float))
                                   and math.isfinite(p) and p > least):
        raise DomainError("p must be a real > {} but got {}"
                          .format(least, emit_cast(p)))
    return float(p)


def trace_power(g, p):
    """tr(G^p), which equals ‖T_μ‖_p^p."""
    p = _check_p(p)
    s = g if isinstance(g, Spectrum) else spectrum(g)
    values = s.eigenvalues[s.eigenvalues > 0]
    return float(np.sum(values ** p))


def schatten_norm(s, p):
    """(Σ λ_k^p)^{1/p}, skipping zero eigenvalues."""
    p = _check_p(p)
    values = s.eigenvalues[s.eigenvalues > 0]
    if not values.size:
        return 0.0
    return float(np.sum(values ** p)) ** (1.0 / p)


def operator_berezin(g, z, s=None):
    """⟨T_μ k_z, k_z⟩ = Σ_k λ_k |⟨k_z, u_k⟩|² from the spectrum of g.

    u_k = A e_k / √λ_k are the eigenvectors of T_μ for the eigenpairs
    (λ_k, e_k) of G, so λ_k |⟨k_z, u_k⟩|² = |Σ_j e_kj √c_j K(z, w_j)|²
    / K(z, z). Zero eigenvalues contribute nothing.
    """
    coords = z.coords if isinstance(z, SiegelPoint) else np.asarray(z)
    if s is None:
        s = spectrum(g)
    mu = g.measure
    b = (np.sqrt(mu.weights) * kernel_array(coords, mu.coords)
         / math.sqrt(float(invariant_density_array(coords))))
    keep = s.eigenvalues > 0
    return float(np.sum(np.abs(s.vectors[:, keep].T @ b) ** 2))


@dataclass(frozen=True)
class TraceCheck:
    lhs: float
    rhs: float
    error_estimate: float
    tail_estimate: Optional[float]

    @property
    def corrected(self):
        tail = self.tail_estimate
        if tail is None or not math.isfinite(tail):
            return self.rhs
        return self.rhs + tail

    @property
    def relative_gap(self):
        if self.lhs == 0:
            return 0.0 if self.corrected == 0 else math.inf
        return abs(self.corrected - self.lhs) / self.lhs

    def to_json(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "error_estimate": self.error_estimate,
            "tail_estimate": self.tail_estimate,
            "corrected": self.corrected,
            "relative_gap": self.relative_gap,
        }


def trace_region(mu, spread=2.0**10):
    """A truncation reaching spread times past the atoms in every way."""
    heights = rho_array(mu.coords)
    top = float(np.max(heights)) * spread
    zprime = (float(np.max(np.abs(mu.coords[:, :-1])))
              if mu.n > 1 else 0.0)
    return Region(
        n=mu.n,
        rho_min=float(np.min(heights)) / spread,
        rho_max=top,
        zprime_radius=zprime + math.sqrt(top),
        re_zn_bound=float(np.max(np.abs(mu.coords[:, -1].real))) + top,
    )


def trace_identity_check(mu, spec=None):
    """Σ λ_k against ∫ μ̃ dλ over a truncation.

    Args:
        mu (AtomicMeasure): Symbol.
        spec (QuadratureSpec, optional): Defaults to trace_region(mu).

    Returns:
        TraceCheck: lhs is the eigenvalue sum, rhs the quadrature.
    """
    lhs = spectrum(gram_matrix(mu)).trace()
    if spec is None:
        spec = QuadratureSpec(region=trace_region(mu))
    field = berezin_field(mu)

    def integrand(coords):
        return field.evaluate(coords) * invariant_density_array(coords)

    result = integrate(integrand, spec)
    return TraceCheck(lhs, result.value, result.error_estimate,
                      result.tail_estimate)


def _check_unit(g, x):
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size != g.size:
        raise DomainError("x has {} entries but the Gram matrix is {}x{}"
                          .format(x.size, g.size, g.size))
    if abs(np.linalg.norm(x) - 1.0) > UNITARY_TOLERANCE:
        raise DomainError("x must be a unit vector (norm {!r})"
                          .format(float(np.linalg.norm(x))))
    return x


def power_inequality_sides(g, p, x, s=None):
    """(⟨G^p x, x⟩, ⟨G x, x⟩^p) by functional calculus on G."""
    p = float(p)
    if not p >= 1:
        raise DomainError("p must be at least 1 but got {}".format(p))
    x = _check_unit(g, x)
    if s is None:
        s = spectrum(g)
    weights = np.abs(s.vectors.conj().T @ x) ** 2
    lhs = float(np.sum(s.eigenvalues ** p * weights))
    rhs = float(np.sum(s.eigenvalues * weights)) ** p
    return lhs, rhs


def power_inequality_check(g, p, x, s=None):
    """Whether ⟨G^p x, x⟩ >= ⟨G x, x⟩^p - 1e-10."""
    lhs, rhs = power_inequality_sides(g, p, x, s)
    return lhs >= rhs - POWER_SLACK


def orthonormal_diagonal_sum(g, p, basis=None):
    """Σ_k ⟨G e_k, e_k⟩^p over the columns of an orthonormal basis.

    For p >= 1 this never exceeds tr(G^p), with equality in the
    eigenbasis.
    """
    p = _check_p(p)
    if basis is None:
        basis = np.eye(g.size, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (g.size, g.size):
        raise DomainError("basis must be {}x{}".format(g.size, g.size))
    defect = np.max(np.abs(basis.conj().T @ basis - np.eye(g.size)))
    if defect > UNITARY_TOLERANCE:
        raise DomainError("basis is not orthonormal (defect {:.2e})"
                          .format(float(defect)))
    diagonal = np.einsum("ik,ij,jk->k", basis.conj(), g.matrix, basis).real
    return float(np.sum(np.maximum(diagonal, 0.0) ** p))


def averaged_berezin(mu, a, r, order=16):
    """Berezin transform of μ̂_r dV at a.

    Equals Σ_j c_j ∫_{D(w_j, r)} |k_a(u)|² / |D(u, r)| dV(u).
    """
    if not isinstance(mu, AtomicMeasure):
        raise TypeError("averaged_berezin needs an AtomicMeasure but got {}"
                        .format(emit_cast(mu)))
    coords = a.coords if isinstance(a, SiegelPoint) else np.asarray(a)
    n = mu.n
    diagonal = float(invariant_density_array(coords))

    def integrand(u):
        return (np.abs(kernel_array(u, coords)) ** 2 / diagonal
                / ball_volume_array(rho_array(u), r, n))

    total = 0.0
    for w, c in zip(mu.coords, mu.weights):
        total += c * ball_integral(integrand, w, r, order=order).value
    return total


def domination_ratio(mu, a, r, order=16):
    """μ̃(a) divided by the Berezin transform of μ̂_r dV at a."""
    return berezin_transform(mu, a) / averaged_berezin(mu, a, r, order)


@dataclass(frozen=True)
class RefinementStep:
    resolution: object
    atoms: int
    trace: float
    norms: dict

    def to_json(self):
        return {
            "resolution": self.resolution,
            "atoms": self.atoms,
            "trace": self.trace,
            "norms": {str(p): v for p, v in self.norms.items()},
        }


def density_trace(mu, spec=None):
    """∫ g dλ over the support, which is tr(T_g)."""
    if spec is None:
        spec = QuadratureSpec(region=mu.support, tail=False)
    return integrate(
        lambda coords: mu.evaluate(coords) * invariant_density_array(coords),
        spec).value


def density_refinement(mu, resolutions: Sequence, ps: Sequence):
    """Schatten norms of discretize(mu, k) for each k in resolutions.

    Returns:
        list[RefinementStep]: One per resolution. Compare each trace
            against density_trace(mu).
    """
    if not isinstance(mu, DensityMeasure):
        raise TypeError("density_refinement needs a DensityMeasure but got"
                        " {}".format(emit_cast(mu)))
    steps = []
    for resolution in resolutions:
        atomic = discretize(mu, resolution)
        if len(atomic):
            s = spectrum(gram_matrix(atomic))
            norms = {p: schatten_norm(s, p) for p in ps}
            trace = s.trace()
        else:
            norms = {p: 0.0 for p in ps}
            trace = 0.0
        logger.info("resolution {}: {} atoms, trace {!r}"
                    .format(resolution, len(atomic), trace))
        steps.append(RefinementStep(resolution, len(atomic), trace, norms))
    return steps


def condition_diagnostics(g, s=None):
    if s is None:
        s = spectrum(g)
    positive = s.eigenvalues[s.eigenvalues > PSD_CLAMP * s.spectral_radius]
    return {
        "size": g.size,
        "spectral_radius": s.spectral_radius,
        "numerical_rank": int(positive.size),
        "clamped": s.clamped,
        "hermitian_defect": g.hermitian_defect,
        "backward_error": s.backward_error,
        "condition": (float(positive[0] / positive[-1])
                      if positive.size else math.inf),
    }
