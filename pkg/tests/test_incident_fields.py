from __future__ import annotations

import math

import numpy as np
import pytest

from fthms.errors import ParameterDomainError, UnsupportedVariantError
from fthms.incident.fields import (
    GAUSSIAN_PLANE,
    MULTI_PULSE,
    POINT_SOURCE,
    PULSE_PLANE,
    IncidentFieldSpec,
    boundary_trace,
    eval_freq,
    eval_time,
    gaussian_plane_time_exact,
    pulse_profile,
)

POINTS = np.array([[0.0, 0.0], [1.0, 0.5], [-0.7, 2.0]])


def test_defaults_per_variant():
    point = IncidentFieldSpec(POINT_SOURCE)
    plane = IncidentFieldSpec(GAUSSIAN_PLANE, direction_angle=0.5 * math.pi)
    assert (point.sigma, point.tau0, point.band) == (2.0, 4.0, (5.0, 25.0))
    assert plane.sigma == pytest.approx(math.sqrt(2.0))
    assert plane.tau0 == 6.0
    np.testing.assert_allclose(plane.direction, [0.0, 1.0], atol=1e-15)
    assert IncidentFieldSpec(GAUSSIAN_PLANE, omega0=50.0).band == (40.0, 60.0)


def test_spec_validation():
    with pytest.raises(UnsupportedVariantError):
        IncidentFieldSpec("spherical")
    with pytest.raises(ParameterDomainError):
        IncidentFieldSpec(GAUSSIAN_PLANE, sigma=-1.0)
    with pytest.raises(ParameterDomainError):
        IncidentFieldSpec(MULTI_PULSE, pulses=0)


def test_gaussian_plane_time_signal_matches_closed_form():
    spec = IncidentFieldSpec(GAUSSIAN_PLANE, direction_angle=0.3)
    t = np.linspace(0.0, 20.0, 81)
    np.testing.assert_allclose(eval_time(spec, POINTS, t), gaussian_plane_time_exact(spec, POINTS, t), atol=1e-7)


def test_frequency_form_symmetry_and_guards():
    spec = IncidentFieldSpec(POINT_SOURCE, source=(0.1, -0.2))
    np.testing.assert_allclose(eval_freq(spec, POINTS, -12.0), np.conj(eval_freq(spec, POINTS, 12.0)))
    with pytest.raises(ParameterDomainError):
        eval_freq(spec, POINTS, 0.0)
    with pytest.raises(ParameterDomainError):
        eval_freq(spec, np.array([[0.1, -0.2]]), 10.0)
    with pytest.raises(UnsupportedVariantError):
        eval_freq(IncidentFieldSpec(PULSE_PLANE), POINTS, 10.0)
    with pytest.raises(UnsupportedVariantError):
        gaussian_plane_time_exact(spec, POINTS, 1.0)


def test_pulse_plane_peaks_on_its_phase():
    spec = IncidentFieldSpec(PULSE_PLANE, amplitude=2.0, t_lag=3.0)
    value = eval_time(spec, np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([6.0, 7.0]))
    assert value.shape == (2, 2)
    assert value[0, 0] == pytest.approx(-2.0 * math.sin(12.0))
    assert value[1, 1] == pytest.approx(value[0, 0])
    assert pulse_profile(np.array([3.0]))[0] == pytest.approx(-math.sin(12.0))


def test_multi_pulse_is_a_sum_of_shifted_pulses():
    single = IncidentFieldSpec(PULSE_PLANE, t_lag=0.0)
    train = IncidentFieldSpec(MULTI_PULSE, t_lag=0.0, pulses=3, spacing=10.0)
    t = np.linspace(0.0, 40.0, 161)
    expected = sum(eval_time(single, POINTS, t - 10.0 * j) for j in range(3))
    np.testing.assert_allclose(eval_time(train, POINTS, t), expected, atol=1e-14)


def test_silent_field_and_boundary_trace_arguments():
    quiet = IncidentFieldSpec(GAUSSIAN_PLANE, amplitude=0.0)
    assert not np.any(eval_time(quiet, POINTS, np.linspace(0.0, 5.0, 6)))
    assert not np.any(eval_freq(quiet, POINTS, 10.0))
    spec = IncidentFieldSpec(GAUSSIAN_PLANE)
    assert boundary_trace(spec, POINTS, omegas=np.array([10.0, 12.0])).shape == (2, 3)
    with pytest.raises(ParameterDomainError):
        boundary_trace(spec, POINTS)
    with pytest.raises(ParameterDomainError):
        boundary_trace(spec, POINTS, times=np.zeros(2), omegas=np.ones(2))
