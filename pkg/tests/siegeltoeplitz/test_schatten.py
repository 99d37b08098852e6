from __future__ import division

import logging
import math
import os

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from siegeltoeplitz import DomainError
from siegeltoeplitz.geometry import (
    SiegelPoint,
    dilate,
    distortion_bounds,
    random_points,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import (
    AtomicMeasure,
    constant_on_box,
    load_measure,
    point_mass,
)
from siegeltoeplitz.schatten import (
    Spectrum,
    ToeplitzGram,
    averaged_berezin,
    condition_diagnostics,
    density_refinement,
    density_trace,
    domination_ratio,
    gram_matrix,
    operator_berezin,
    orthonormal_diagonal_sum,
    power_inequality_check,
    power_inequality_sides,
    schatten_norm,
    spectrum,
    trace_identity_check,
    trace_power,
)
from siegeltoeplitz.transforms import berezin_transform

I1 = SiegelPoint.i(1)
K_II = 1 / (4 * math.pi)


@pytest.fixture
def two_atoms():
    test_dir = os.path.dirname(os.path.realpath(__file__))
    return load_measure(os.path.join(test_dir, "data", "two_atoms.json"))


def random_measure(seed, n=1, count=6):
    rng = np.random.default_rng(seed)
    coords = random_points(rng, n, count, rho_range=(0.5, 4.0))
    return AtomicMeasure(zip(coords, rng.uniform(0.5, 2.0, size=count)))


def unit_vector(seed, size):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=size) + 1j * rng.normal(size=size)
    return x / np.linalg.norm(x)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.5])
def test_point_mass_norm(p):
    s = spectrum(gram_matrix(point_mass(I1)))
    assert schatten_norm(s, p) == pytest.approx(K_II)
    assert trace_power(s, p) == pytest.approx(K_II ** p)


def test_two_atoms(two_atoms):
    g = gram_matrix(two_atoms)
    assert g.size == 2
    assert np.allclose(g.matrix, g.matrix.conj().T)
    s = spectrum(g)
    assert len(s) == 2
    assert s.eigenvalues[0] >= s.eigenvalues[1] > 0
    # K(w, w) = 1/(16π) at height 2
    assert s.trace() == pytest.approx(K_II + 2 / (16 * math.pi))
    assert trace_power(g, 2) == pytest.approx(
        float(np.sum(np.abs(g.matrix) ** 2)))
    assert schatten_norm(s, 1) == pytest.approx(s.trace())


def test_coincident_atoms_are_rank_one():
    mu = AtomicMeasure([(I1, 1.0), (I1, 1.0)])
    s = spectrum(gram_matrix(mu))
    assert s.clamped <= 1
    assert s.eigenvalues[0] == pytest.approx(2 * K_II)
    assert 0.0 <= s.eigenvalues[1] <= 1e-14 * K_II
    assert condition_diagnostics(gram_matrix(mu), s)["numerical_rank"] == 1
    assert schatten_norm(s, 0.5) == pytest.approx(2 * K_II)


def test_gram_errors():
    with pytest.raises(DomainError):
        gram_matrix(AtomicMeasure([], n=1))
    with pytest.raises(TypeError):
        gram_matrix(constant_on_box(Region(1, 0.5, 2.0)))
    s = spectrum(gram_matrix(point_mass(I1)))
    with pytest.raises(DomainError):
        schatten_norm(s, 0.0)
    with pytest.raises(DomainError):
        trace_power(s, math.nan)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(0.1, 10.0))
def test_norm_is_homogeneous(seed, c):
    mu = random_measure(seed)
    base = spectrum(gram_matrix(mu))
    scaled = spectrum(gram_matrix(mu.scaled(c)))
    for p in (0.5, 1.0, 2.0):
        assert schatten_norm(scaled, p) == pytest.approx(
            c * schatten_norm(base, p), rel=1e-9)


def test_order_does_not_matter():
    mu = random_measure(11, n=2)
    order = list(reversed(range(len(mu))))
    one = spectrum(gram_matrix(mu)).eigenvalues
    two = spectrum(gram_matrix(mu.permuted(order))).eigenvalues
    assert np.allclose(one, two, rtol=1e-10, atol=1e-12 * one[0])


def test_operator_berezin_matches_transform(two_atoms):
    g = gram_matrix(two_atoms)
    for z in random_points(np.random.default_rng(0), 1, 10):
        assert operator_berezin(g, z) == pytest.approx(
            berezin_transform(two_atoms, z))


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_power_inequality(p):
    mu = random_measure(5, n=2)
    g = gram_matrix(mu)
    s = spectrum(g)
    for seed in range(10):
        x = unit_vector(seed, g.size)
        assert power_inequality_check(g, p, x, s)
    lhs, rhs = power_inequality_sides(g, p, s.vectors[:, 0], s)
    assert lhs == pytest.approx(rhs)


def test_power_inequality_errors(two_atoms):
    g = gram_matrix(two_atoms)
    with pytest.raises(DomainError):
        power_inequality_sides(g, 0.5, unit_vector(0, 2))
    with pytest.raises(DomainError):
        power_inequality_sides(g, 2.0, np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        power_inequality_sides(g, 2.0, unit_vector(0, 3))


def test_orthonormal_diagonal_sum():
    mu = random_measure(8)
    g = gram_matrix(mu)
    s = spectrum(g)
    p = 2.0
    full = trace_power(s, p)
    assert orthonormal_diagonal_sum(g, p) <= full * (1 + 1e-12)
    q, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(g.size,
                                                             g.size)))
    assert orthonormal_diagonal_sum(g, p, q) <= full * (1 + 1e-12)
    assert orthonormal_diagonal_sum(g, p, s.vectors) == pytest.approx(full)
    with pytest.raises(DomainError):
        orthonormal_diagonal_sum(g, p, 2 * np.eye(g.size))


def test_trace_identity_for_point_mass():
    check = trace_identity_check(point_mass(I1))
    assert check.lhs == pytest.approx(K_II)
    assert check.relative_gap <= 0.02
    assert check.to_json()["corrected"] == check.corrected


def test_domination_ratio(two_atoms):
    r = 0.5
    # |k_a|² and |D(u, r)| each move by at most high^(2(n+1)) on a ball
    low, high = distortion_bounds(r)
    for a in (I1, SiegelPoint([1 + 3j])):
        ratio = domination_ratio(two_atoms, a, r)
        assert low ** 8 <= ratio <= high ** 8
    assert averaged_berezin(point_mass(I1), I1, r) > 0
    with pytest.raises(TypeError):
        averaged_berezin(constant_on_box(Region(1, 0.5, 2.0)), I1, r)


def test_density_refinement_converges():
    box = constant_on_box(Region(1, 0.5, 2.0, 1.0, 1.0))
    exact = 3 / (4 * math.pi)
    assert density_trace(box) == pytest.approx(exact, rel=1e-8)
    steps = density_refinement(box, [(2, 2), (4, 4), (16, 16)], [1, 2])
    assert [step.atoms for step in steps] == [4, 16, 256]
    gaps = [abs(step.trace - exact) for step in steps]
    assert gaps == sorted(gaps, reverse=True)
    assert steps[-1].trace == pytest.approx(exact, rel=0.01)
    assert steps[-1].norms[1] == pytest.approx(steps[-1].trace)
    assert steps[-1].to_json()["norms"]["2"] == steps[-1].norms[2]


def test_condition_diagnostics(two_atoms):
    report = condition_diagnostics(gram_matrix(two_atoms))
    assert report["size"] == 2
    assert report["numerical_rank"] == 2
    assert report["condition"] >= 1.0
    assert report["backward_error"] < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), t=st.floats(0.25, 4.0),
       n=st.integers(1, 3))
def test_gram_dilation_covariance(seed, t, n):
    # ρ(δ_t z, δ_t w) = t² ρ(z, w), so K picks up t^{-2(n+1)}
    mu = random_measure(seed, n=n)
    moved = gram_matrix(mu.pushforward(lambda p: dilate(t, p))).matrix
    expected = gram_matrix(mu).matrix * t ** (-2 * (n + 1))
    assert np.allclose(moved, expected, rtol=1e-10,
                       atol=1e-10 * float(np.max(np.abs(expected))))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), weight=st.floats(0.1, 10.0),
       p=st.floats(1.0, 4.0))
def test_norm_grows_with_an_atom(seed, weight, p):
    mu = random_measure(seed, n=2)
    extra = SiegelPoint(random_points(np.random.default_rng(seed + 1), 2,
                                      1, rho_range=(0.5, 4.0))[0])
    before = schatten_norm(spectrum(gram_matrix(mu)), p)
    after = schatten_norm(spectrum(gram_matrix(mu.with_atom(extra,
                                                             weight))), p)
    assert after >= before * (1 - 1e-10)


def test_spectrum_keeps_small_positive_eigenvalues(two_atoms):
    g = ToeplitzGram(np.diag([1.0, 1e-13]).astype(complex), two_atoms)
    s = spectrum(g)
    assert s.clamped == 0
    assert s.eigenvalues[1] == 1e-13
    assert trace_power(s, 0.5) == pytest.approx(1.0 + 1e-13 ** 0.5)
    assert condition_diagnostics(g, s)["numerical_rank"] == 1


def test_spectrum_clamps_negative_eigenvalues(two_atoms, caplog):
    g = ToeplitzGram(np.diag([1.0, -1e-13]).astype(complex), two_atoms)
    with caplog.at_level(logging.WARNING):
        s = spectrum(g)
    assert s.clamped == 1
    assert s.eigenvalues[1] == 0.0
    assert "negative Gram eigenvalues" in caplog.text


def test_operator_berezin_uses_the_spectrum(two_atoms):
    g = gram_matrix(two_atoms)
    s = spectrum(g)
    z = SiegelPoint([0.25 + 1.5j])
    assert operator_berezin(g, z, s) == pytest.approx(
        berezin_transform(two_atoms, z), rel=1e-10)
    # dropping the top eigenpair removes its share of the sum
    top = Spectrum(s.eigenvalues * np.array([0.0, 1.0]), s.vectors)
    assert operator_berezin(g, z, top) < operator_berezin(g, z, s)
