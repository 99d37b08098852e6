from __future__ import division

import json
import math
import os

import numpy as np
import pytest

from siegeltoeplitz import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
)
from siegeltoeplitz.geometry import (
    SiegelPoint,
    ball_volume,
    dilate,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import (
    AtomicMeasure,
    admissibility,
    ball_mass,
    constant_on_box,
    density_mass,
    discretize,
    gaussian,
    load_measure,
    measure_from_config,
    point_mass,
    random_atomic_measure,
    save_measure,
)

I1 = SiegelPoint.i(1)


@pytest.fixture
def data_dir():
    test_dir = os.path.dirname(os.path.realpath(__file__))
    return os.path.join(test_dir, "data")


@pytest.fixture
def two_atoms(data_dir):
    return load_measure(os.path.join(data_dir, "two_atoms.json"))


@pytest.fixture
def box(data_dir):
    return load_measure(os.path.join(data_dir, "constant_box.json"))


def test_load_atomic(two_atoms):
    assert len(two_atoms) == 2
    assert two_atoms.n == 1
    assert two_atoms.total_mass() == 3.0
    assert two_atoms.points[1] == SiegelPoint([0.5 + 2j])


def test_atomic_errors():
    with pytest.raises(DomainError):
        AtomicMeasure([(I1, 0.0)])
    with pytest.raises(DomainError):
        AtomicMeasure([(I1, math.nan)])
    with pytest.raises(DomainError):
        AtomicMeasure([])
    with pytest.raises(DimensionMismatchError):
        AtomicMeasure([(I1, 1.0), (SiegelPoint.i(2), 1.0)])
    with pytest.raises(DimensionMismatchError):
        AtomicMeasure([(I1, 1.0)], n=2)
    with pytest.raises(ConfigError):
        AtomicMeasure.from_json({"atoms": [{"weight": 1.0}]})
    with pytest.raises(ConfigError):
        measure_from_config([1, 2])


def test_empty_measure():
    empty = AtomicMeasure([], n=2)
    assert len(empty) == 0
    assert empty.total_mass() == 0.0
    assert ball_mass(empty, SiegelPoint.i(2), 1.0) == 0.0
    assert admissibility(empty, 3.0) == 0.0
    assert AtomicMeasure.from_json(empty.to_json()).n == 2


def test_atomic_transformations(two_atoms):
    doubled = two_atoms.scaled(2.0)
    assert np.allclose(doubled.weights, [2.0, 4.0])
    moved = two_atoms.pushforward(lambda p: dilate(2.0, p))
    assert moved.points[0] == SiegelPoint([4j])
    assert np.array_equal(moved.weights, two_atoms.weights)
    grown = two_atoms.with_atom(SiegelPoint([3j]), 0.5)
    assert len(grown) == 3
    assert grown.total_mass() == 3.5
    flipped = two_atoms.permuted([1, 0])
    assert flipped.points[0] == two_atoms.points[1]
    with pytest.raises(DomainError):
        two_atoms.scaled(0.0)


def test_atomic_ball_mass(two_atoms):
    assert ball_mass(two_atoms, I1, 0.2) == 1.0
    assert ball_mass(two_atoms, I1, 5.0) == 3.0
    assert ball_mass(two_atoms, SiegelPoint([100 + 1j]), 1.0) == 0.0
    with pytest.raises(DomainError):
        ball_mass(two_atoms, I1, 0.0)


def test_atomic_admissibility(two_atoms):
    expected = 1 / 4 + 2 / abs(0.5 + 3j) ** 2
    assert admissibility(two_atoms, 2.0) == pytest.approx(expected)
    with pytest.raises(DomainError):
        admissibility(two_atoms, 0.0)


def test_density_basics(box):
    assert box.label == "constant_on_box"
    assert box(I1) == 1.0
    assert box(SiegelPoint([5j])) == 0.0
    assert density_mass(box) == pytest.approx(3.0, rel=1e-10)
    assert measure_from_config(box.to_json()).to_json() == box.to_json()


def test_density_ball_mass(box):
    # D(i, 0.2) lies inside the box, so the mass is the ball volume
    got = ball_mass(box, I1, 0.2)
    assert got == pytest.approx(ball_volume(I1, 0.2), rel=1e-8)


def test_density_admissibility(box):
    # ∫∫ dx dh / (x² + (h+1)²) over [-1, 1] x [0.5, 2]
    def column(h):
        return 2 * math.atan(1 / (h + 1)) / (h + 1)

    nodes, weights = np.polynomial.legendre.leggauss(40)
    hs = 1.25 + 0.75 * nodes
    expected = 0.75 * sum(w * column(h) for h, w in zip(hs, weights))
    assert admissibility(box, 2.0) == pytest.approx(expected, rel=1e-8)


def test_gaussian():
    region = Region(1, 0.5, 3.0, 1.0, 2.0)
    bump = gaussian(region, SiegelPoint([1.5j]), 0.25, amplitude=2.0)
    assert bump(SiegelPoint([1.5j])) == pytest.approx(2.0)
    assert bump(SiegelPoint([0.25 + 1.5j])) == pytest.approx(
        2.0 * math.exp(-0.5))
    assert measure_from_config(bump.to_json()).params == bump.params
    with pytest.raises(DomainError):
        gaussian(region, SiegelPoint([1.5j]), 0.0)
    with pytest.raises(DimensionMismatchError):
        gaussian(region, SiegelPoint.i(2), 0.5)


@pytest.mark.parametrize("data", [
    {"family": "nope", "region": {"n": 1, "rho_min": 1, "rho_max": 2}},
    {"family": "gaussian", "region": {"n": 1, "rho_min": 1, "rho_max": 2}},
    "constant_on_box",
])
def test_bad_density_config(data):
    with pytest.raises(ConfigError):
        measure_from_config(data)


def test_negative_density_is_rejected():
    with pytest.raises(DomainError):
        constant_on_box(Region(1, 0.5, 2.0), value=-1.0)


def test_discretize_constant(box):
    atomic = discretize(box, (4, 6))
    assert len(atomic) == 24
    assert atomic.total_mass() == pytest.approx(3.0)
    heights = sorted({round(p.rho, 12) for p in atomic.points})
    assert heights == pytest.approx(
        [0.5 + 1.5 * (k + 0.5) / 6 for k in range(6)])


def test_discretize_n2():
    region = Region(2, 0.5, 2.0, 1.0, 1.0)
    atomic = discretize(constant_on_box(region), 2)
    assert len(atomic) == 16
    assert atomic.total_mass() == pytest.approx(region.chart_volume())
    assert np.all(region.contains(atomic.coords))


def test_discretize_errors(box):
    with pytest.raises(DimensionMismatchError):
        discretize(box, (2, 2, 2))
    with pytest.raises(DomainError):
        discretize(box, 0)


def test_random_atomic_measure():
    region = Region(2, 0.5, 2.0)
    rng = np.random.default_rng(4)
    for _ in range(5):
        mu = random_atomic_measure(rng, region, max_atoms=6)
        assert 1 <= len(mu) <= 6
        assert np.all(region.contains(mu.coords))
        assert np.all((mu.weights >= 0.5) & (mu.weights <= 2.0))


def test_save_and_load(tmp_path, two_atoms):
    path = str(tmp_path / "mu.json")
    save_measure(two_atoms, path)
    with open(path, 'r') as stream:
        assert "atoms" in json.load(stream)
    loaded = load_measure(path)
    assert loaded.points == two_atoms.points
    assert np.array_equal(loaded.weights, two_atoms.weights)
    assert len(point_mass(I1, 3.0)) == 1


def test_ball_mass_grows_with_r(two_atoms, box):
    radii = [0.1, 0.3, 0.5, 1.0, 2.0, 5.0]
    for z in (I1, SiegelPoint([0.5 + 2j]), SiegelPoint([3j])):
        masses = [ball_mass(two_atoms, z, r) for r in radii]
        assert masses == sorted(masses)
    # these balls stay inside the box
    masses = [ball_mass(box, I1, r) for r in (0.1, 0.2, 0.3)]
    assert masses[0] < masses[1] < masses[2]


def test_ball_mass_adds_over_disjoint_atoms():
    far = SiegelPoint([0.5 + 2j])
    first = point_mass(I1)
    second = point_mass(far, 2.0)
    both = first.with_atom(far, 2.0)
    for z in (I1, far, SiegelPoint([1 + 1.5j])):
        for r in (0.3, 0.8, 2.0):
            assert ball_mass(both, z, r) == (ball_mass(first, z, r)
                                             + ball_mass(second, z, r))


def test_discretize_mass_converges():
    region = Region(1, 0.5, 3.0, 1.0, 2.0)
    width = 0.5
    bump = gaussian(region, SiegelPoint([1.5j]), width)

    def line(a, b, c):
        root = width * math.sqrt(2)
        return (width * math.sqrt(math.pi / 2)
                * (math.erf((b - c) / root) - math.erf((a - c) / root)))

    exact = line(-2.0, 2.0, 0.0) * line(0.5, 3.0, 1.5)
    errors = [abs(discretize(bump, k).total_mass() - exact)
              for k in (8, 16, 32)]
    assert errors[0] > 0
    assert errors[1] <= 0.6 * errors[0]
    assert errors[2] <= 0.6 * errors[1]
