from __future__ import division

import logging
import math
import unittest

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from siegeltoeplitz import (
    DimensionMismatchError,
    DomainError,
    MetricConsistencyError,
)
from siegeltoeplitz import geometry
from siegeltoeplitz.geometry import (
    DomainParams,
    SiegelPoint,
    automorphism,
    automorphism_array,
    ball_volume,
    bergman_kernel,
    bergman_metric,
    chart,
    dilate,
    distortion_bounds,
    inverse_automorphism,
    inverse_automorphism_array,
    inverse_chart,
    invariant_ball_measure,
    invariant_density,
    invariant_density_array,
    kernel_constant,
    metric_array,
    monte_carlo_ball_lambda,
    monte_carlo_ball_volume,
    normalized_kernel,
    point_from_json,
    rho,
    rho_array,
    rho_form,
    rho_form_array,
    random_points,
    translate,
)
from siegeltoeplitz.quadrature import ball_integral

I1 = SiegelPoint.i(1)
TWO_I = SiegelPoint([2j])


def test_rho_form_examples():
    assert rho_form(I1, I1) == pytest.approx(1.0)
    assert rho_form(I1, TWO_I) == pytest.approx(1.5)


def test_rho_examples():
    assert rho(I1) == 1.0
    assert rho(TWO_I) == 2.0
    assert rho(SiegelPoint([1.0, 0.7 + 3j])) == pytest.approx(2.0)


def test_kernel_examples():
    assert bergman_kernel(I1, I1) == pytest.approx(1 / (4 * math.pi))
    assert bergman_kernel(I1, TWO_I) == pytest.approx(1 / (9 * math.pi))
    assert normalized_kernel(I1, I1) == pytest.approx(
        math.sqrt(1 / (4 * math.pi)))
    assert invariant_density(TWO_I) == pytest.approx(1 / (16 * math.pi))


def test_kernel_constant():
    assert kernel_constant(1) == pytest.approx(1 / (4 * math.pi))
    assert kernel_constant(2) == pytest.approx(2 / (4 * math.pi ** 2))
    assert DomainParams(3).kernel_constant == kernel_constant(3)


def test_metric_examples():
    assert bergman_metric(I1, I1) == pytest.approx(0.0, abs=1e-7)
    assert bergman_metric(I1, TWO_I) == pytest.approx(0.5 * math.log(2))
    assert bergman_metric(TWO_I, I1) == pytest.approx(0.5 * math.log(2))


def test_maps_examples():
    assert dilate(2.0, I1) == SiegelPoint([4j])
    z = SiegelPoint([1 + 2j, 3 + 7j])
    # h_z(z) = (0', i rho(z))
    got = translate(z, z).coords
    assert np.allclose(got, [0, 1j * rho(z)], atol=1e-12)
    assert np.allclose(automorphism(z, z).coords, [0, 1j], atol=1e-12)
    u = SiegelPoint([0.5, 3j])
    back = inverse_automorphism(z, automorphism(z, u))
    assert np.allclose(back.coords, u.coords, atol=1e-10)


def test_ball_volume_examples():
    r = math.atanh(0.5)
    assert ball_volume(I1, r) == pytest.approx(16 * math.pi / 9)
    # scales like rho^{n+1}
    assert ball_volume(TWO_I, r) == pytest.approx(4 * 16 * math.pi / 9)
    assert invariant_ball_measure(r, 2) == pytest.approx(math.sinh(r) ** 4)


def test_distortion_bounds():
    low, high = distortion_bounds(math.atanh(0.5))
    assert low == pytest.approx(1 / 3)
    assert high == pytest.approx(3.0)


@pytest.mark.parametrize("coords", [[0j], [1 + 0j], [-2j], [2.0, 1.5j]])
def test_point_outside_domain(coords):
    with pytest.raises(DomainError):
        SiegelPoint(coords)


def test_errors():
    with pytest.raises(DimensionMismatchError):
        rho_form(SiegelPoint.i(1), SiegelPoint.i(2))
    with pytest.raises(DomainError):
        dilate(0.0, I1)
    with pytest.raises(DomainError):
        ball_volume(I1, -1.0)
    with pytest.raises(DomainError):
        DomainParams(0)
    with pytest.raises(DomainError):
        chart([0.0, -1.0])
    with pytest.raises(MetricConsistencyError):
        metric_array(I1, np.array([0.5 - 1j]))


def test_point_json():
    z = SiegelPoint([1 + 2j, 3 + 7j])
    assert point_from_json(z.to_json()) == z
    with pytest.raises(DomainError):
        point_from_json([[1.0]])


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-10, 10), h=st.floats(0.01, 100))
def test_chart_round_trip(x, h):
    z = chart([x, h])
    assert z.rho == pytest.approx(h)
    assert np.allclose(inverse_chart(z), [x, h])


class IdentityTests(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def check_dimension(self, n):
        for z in random_points(self.rng, n, 20):
            u = random_points(self.rng, n, 50)
            v = random_points(self.rng, n, 50)
            uv = rho_form_array(u, v)
            # Hermitian symmetry
            self.assertLess(float(np.max(
                np.abs(uv - np.conj(rho_form_array(v, u))) / np.abs(uv))),
                1e-12)
            # 2|rho(u,v)| >= max(rho(u), rho(v)) and Re rho(u,v) is
            # at least the mean height
            heights = np.maximum(rho_array(u), rho_array(v))
            self.assertTrue(np.all(2 * np.abs(uv) >= heights
                                   * (1 - 1e-12)))
            self.assertTrue(np.all(
                uv.real >= 0.5 * (rho_array(u) + rho_array(v))
                * (1 - 1e-12)))
            su = automorphism_array(z, u)
            sv = automorphism_array(z, v)
            expected = uv / float(rho_array(z))
            self.assertLess(float(np.max(
                np.abs(rho_form_array(su, sv) - expected)
                / np.abs(expected))), 1e-10)
            iu = inverse_automorphism_array(z, u)
            iv = inverse_automorphism_array(z, v)
            expected = uv * float(rho_array(z))
            self.assertLess(float(np.max(
                np.abs(rho_form_array(iu, iv) - expected)
                / np.abs(expected))), 1e-10)
            self.assertLess(float(np.max(np.abs(
                inverse_automorphism_array(z, su) - u)
                / (1 + np.abs(u)))), 1e-10)
            self.assertLess(float(np.max(np.abs(
                metric_array(su, sv) - metric_array(u, v)))), 1e-8)

    def test_identities_n1(self):
        self.check_dimension(1)

    def test_identities_n2(self):
        self.check_dimension(2)

    def test_identities_n3(self):
        self.check_dimension(3)

    def test_dilation_scales_height(self):
        u = random_points(self.rng, 2, 10)
        for t in (0.3, 1.0, 2.5):
            scaled = np.array([dilate(t, p).coords for p in u])
            self.assertTrue(np.allclose(rho_array(scaled),
                                        t * t * rho_array(u)))


@pytest.mark.parametrize("n", [1, 2])
def test_lambda_of_ball_is_constant(n):
    rng = np.random.default_rng(1)
    r = 0.7
    for z in random_points(rng, n, 4):
        got = ball_integral(invariant_density_array, z, r).value
        assert got == pytest.approx(math.sinh(r) ** (2 * n), rel=1e-5)


def test_monte_carlo_ball_volume():
    z = SiegelPoint([0.3 + 1.5j])
    estimate, error = monte_carlo_ball_volume(z, 0.5, samples=200000)
    assert error > 0
    assert estimate == pytest.approx(ball_volume(z, 0.5), rel=0.02)


def test_monte_carlo_ball_lambda():
    estimate, _ = monte_carlo_ball_lambda(I1, 0.5, samples=200000)
    assert estimate == pytest.approx(math.sinh(0.5) ** 2, rel=0.03)


def test_radicand_clamp_warns(monkeypatch, caplog):
    # |ρ(z,w)| a hair below √(ρ(z)ρ(w)) gives a radicand of about -2e-14
    def short_form(z, w):
        return np.full(np.broadcast_shapes(z.shape[:-1], w.shape[:-1]),
                       1.0 - 1e-14, dtype=complex)

    monkeypatch.setattr(geometry, "rho_form_array", short_form)
    with caplog.at_level(logging.WARNING):
        beta = metric_array(I1.coords, I1.coords)
    assert float(beta) == 0.0
    assert "Clamped metric radicand" in caplog.text
