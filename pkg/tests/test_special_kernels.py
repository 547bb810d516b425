from __future__ import annotations

import numpy as np
import pytest
from scipy import special as sp

from fthms.errors import ParameterDomainError, SingularEvaluationError
from fthms.geometry.catalog import kite
from fthms.special.bessel import bessel, hankel1
from fthms.special.kernels import dphi_factor, kernel_phi, phi_of_distance, split_kernel, wavenumber


@pytest.mark.parametrize("kind, reference", [("J0", sp.j0), ("J1", sp.j1), ("Y0", sp.y0), ("Y1", sp.y1)])
def test_bessel_matches_reference(kind, reference):
    x = np.array([1e-3, 0.5, 3.0, 40.0, 250.0])
    np.testing.assert_allclose(bessel(kind, x), reference(x), rtol=1e-14)


def test_bessel_domain_errors():
    with pytest.raises(ParameterDomainError):
        bessel("Y0", 0.0)
    with pytest.raises(ParameterDomainError):
        bessel("J0", -1.0)
    with pytest.raises(ParameterDomainError):
        bessel("K0", 1.0)


def test_hankel_orders():
    x = np.array([0.3, 2.0, 17.5])
    np.testing.assert_allclose(hankel1(0, x), sp.j0(x) + 1j * sp.y0(x), rtol=1e-14)
    np.testing.assert_allclose(hankel1(4, x), sp.hankel1(4, x), rtol=1e-14)
    with pytest.raises(ParameterDomainError):
        hankel1(0, 0.0)


def test_fundamental_solution_and_negative_frequency():
    r = np.array([0.1, 1.0, 5.0])
    value = phi_of_distance(3.0, r)
    np.testing.assert_allclose(value, 0.25j * sp.hankel1(0, 3.0 * r), rtol=1e-14)
    np.testing.assert_allclose(phi_of_distance(-3.0, r), np.conj(value))


def test_normal_derivative_factor_matches_finite_difference():
    kappa, r, h = 2.5, 0.8, 1e-6
    slope = (phi_of_distance(kappa, r + h) - phi_of_distance(kappa, r - h)) / (2.0 * h)
    # ∂Φ/∂r = −factor·r since (x − y)·ν = r for a radial normal pointing at x.
    assert dphi_factor(kappa, r) * r == pytest.approx(-slope, rel=1e-7)


def test_kernel_phi_guards():
    with pytest.raises(SingularEvaluationError):
        kernel_phi(1.0, 1.0, np.array([0.0, 0.0]), np.array([0.0, 0.0]))
    with pytest.raises(ParameterDomainError):
        wavenumber(0.0, 1.0)
    with pytest.raises(ParameterDomainError):
        wavenumber(1.0, -1.0)


@pytest.mark.parametrize("kappa", [3.0, -3.0])
def test_split_kernel_reassembles_off_the_diagonal(kappa):
    curve = kite()
    theta = np.array([0.3, 1.2, 4.0, 5.9])
    tau = np.array([2.0, 1.25, 0.5, 0.2])
    diff = curve.position(theta) - curve.position(tau)
    r = np.linalg.norm(diff, axis=-1)

    single = split_kernel("V", kappa, curve, theta, tau)
    np.testing.assert_allclose(single.reassemble(theta, tau), phi_of_distance(kappa, r), rtol=1e-12)

    double = split_kernel("K", kappa, curve, theta, tau)
    projection = np.sum(diff * curve.normal(tau), axis=-1)
    np.testing.assert_allclose(double.reassemble(theta, tau), dphi_factor(kappa, r) * projection, rtol=1e-11)


@pytest.mark.parametrize("operator", ["V", "K"])
def test_split_kernel_smooth_part_is_continuous_at_the_diagonal(operator):
    curve = kite()
    theta = np.array([0.7, 2.5])
    on = split_kernel(operator, 4.0, curve, theta, theta)
    near = split_kernel(operator, 4.0, curve, theta, theta + 1e-4)
    np.testing.assert_allclose(near.m2, on.m2, rtol=1e-3, atol=1e-4)
