from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import legendre
from scipy.integrate import quad

from fthms.errors import ParameterDomainError, TransformError
from fthms.ftransform import FrequencyGrid, TimeWindowPartition, build_time_samples, inverse_ft, recenter_sum
from fthms.ftransform.continuation import band_weights, fourier_continuation
from fthms.ftransform.filon import chebyshev_moments, fcc_graded_integral
from fthms.ftransform.forward import SlowForwardTransform, slow_forward_ft
from fthms.ftransform.inverse import InverseTransform
from fthms.ftransform.grid import MAX_CELL_RATIO
from fthms.harness.acceptance import transform_check


def test_windows_sum_to_one_up_to_the_horizon():
    partition = TimeWindowPartition(10.0, 5)
    t = np.linspace(0.0, partition.horizon, 4001)
    np.testing.assert_allclose(partition.total(t), 1.0, atol=1e-13)
    assert partition.horizon == pytest.approx(65.0)
    assert partition.end == pytest.approx(70.0)
    assert partition.window(1, 10.5)[0] == 0.0


def test_partition_rejects_bad_parameters():
    with pytest.raises(ParameterDomainError):
        TimeWindowPartition(0.0, 2)
    with pytest.raises(ParameterDomainError):
        TimeWindowPartition(4.0, 0)
    with pytest.raises(IndexError):
        TimeWindowPartition(4.0, 2).center(3)


def test_time_samples_put_every_center_on_a_node():
    partition = TimeWindowPartition(8.0, 3)
    samples = build_time_samples(partition, dt=0.3)
    assert samples.lead % 2 == 0
    for q in (1, 2, 3):
        center = partition.center(q)
        assert samples.times[samples.index_of(center)] == pytest.approx(center, abs=1e-12)
    assert samples.times[samples.nonnegative()][0] == 0.0
    with pytest.raises(TransformError):
        samples.index_of(partition.end + 5.0)


def test_time_samples_from_step_count():
    samples = build_time_samples(TimeWindowPartition(8.0, 2), n_steps=100)
    assert samples.dt == pytest.approx(0.2)
    assert samples.lead == 40
    assert samples.end == pytest.approx(20.0)
    with pytest.raises(ParameterDomainError):
        build_time_samples(TimeWindowPartition(8.0, 2))
    with pytest.raises(ParameterDomainError):
        build_time_samples(TimeWindowPartition(8.0, 2), n_steps=0)


def test_frequency_grid_layout():
    grid = FrequencyGrid()
    graded = grid.nodes[grid.graded_slice]
    assert np.all((graded > 0.0) & (graded < grid.cutoff))
    assert grid.nodes[grid.band_slice][0] == grid.cutoff
    assert grid.nodes[-1] == grid.bandwidth
    assert all(cell.hi / cell.lo <= MAX_CELL_RATIO + 1e-12 for cell in grid.cells if not cell.inner)
    assert FrequencyGrid(low_frequency=False).size == grid.count


def test_frequency_grid_validation():
    with pytest.raises(ParameterDomainError):
        FrequencyGrid(cutoff=2.0, bandwidth=1.0)
    with pytest.raises(TransformError):
        FrequencyGrid(count=10)


def test_slow_transform_of_centered_gaussians():
    grid = FrequencyGrid()
    partition = TimeWindowPartition(8.0, 2)
    samples = build_time_samples(partition, dt=0.05)
    forward = SlowForwardTransform(grid, partition, samples)
    exact = 0.5 * math.sqrt(math.pi) * np.exp(-grid.nodes**2 / 16.0)
    for q in (1, 2):
        trace = np.exp(-4.0 * (samples.times - partition.center(q)) ** 2)
        np.testing.assert_allclose(forward.apply(trace, q), exact, atol=1e-10)


def test_slow_transform_sample_checks():
    grid = FrequencyGrid()
    partition = TimeWindowPartition(8.0, 2)
    with pytest.raises(TransformError):
        slow_forward_ft(np.zeros(7), 1, grid, partition)
    forward = SlowForwardTransform(grid, partition, build_time_samples(partition, dt=0.1))
    with pytest.raises(TransformError):
        forward.apply(np.zeros(5), 1)


def test_inverse_transform_matches_gaussian_pairs():
    result = transform_check()
    assert result.passed, result.line


def test_inverse_transform_of_a_single_time_is_scalar():
    grid = FrequencyGrid()
    value = inverse_ft(np.exp(-(grid.nodes**2)), grid, 1.0)
    assert np.ndim(value) == 0
    assert value == pytest.approx(math.exp(-0.25) / (2.0 * math.sqrt(math.pi)), abs=1e-8)
    with pytest.raises(TransformError):
        inverse_ft(np.ones(3), grid, 1.0)


def _band(start: float = 5.0, end: float = 25.0, count: int = 501) -> np.ndarray:
    return np.linspace(start, end, count)


def _cosine_integral(frequency: float, t: float, start: float, end: float) -> complex:
    def piece(rate: float) -> complex:
        return (np.exp(1j * rate * end) - np.exp(1j * rate * start)) / (1j * rate)

    return 0.5 * (piece(frequency - t) + piece(-frequency - t))


def test_fourier_continuation_matches_the_samples():
    omega = _band()
    samples = np.cos(3.0 * omega)
    fit = fourier_continuation(samples, 5.0, 25.0)
    np.testing.assert_allclose(fit(omega), samples, atol=1e-10)
    assert fit.period > fit.length
    with pytest.raises(TransformError):
        fourier_continuation(np.ones(49), 0.0, 1.0)
    with pytest.raises(TransformError):
        fourier_continuation(np.ones(60), 1.0, 1.0)


def test_fourier_continuation_resolves_smooth_data_between_samples():
    omega = np.linspace(1.0, 25.0, 501)
    fit = fourier_continuation(np.exp(2j * omega) / (1.0 + 0.1 * omega), 1.0, 25.0)
    between = np.linspace(1.01, 24.99, 97)
    np.testing.assert_allclose(fit(between), np.exp(2j * between) / (1.0 + 0.1 * between), atol=1e-9)


def test_continuation_integral_of_a_cosine():
    fit = fourier_continuation(np.cos(3.0 * _band()), 5.0, 25.0)
    assert fit.oscillatory_integral(7.0)[0] == pytest.approx(_cosine_integral(3.0, 7.0, 5.0, 25.0), abs=1e-9)


def test_continuation_integral_of_a_single_exponential():
    omega = np.linspace(1.0, 25.0, 501)
    fit = fourier_continuation(np.exp(2j * omega), 1.0, 25.0)
    exact = (np.exp(-3j * 25.0) - np.exp(-3j * 1.0)) / (-3j)
    assert fit.oscillatory_integral(5.0)[0] == pytest.approx(exact, abs=1e-9)


def test_continuation_integral_of_a_rational_function():
    fit = fourier_continuation(1.0 / (1.0 + _band() ** 2), 5.0, 25.0)
    t = 50.0
    real, _ = quad(lambda w: 1.0 / (1.0 + w * w), 5.0, 25.0, weight="cos", wvar=t, epsabs=1e-14)
    imag, _ = quad(lambda w: 1.0 / (1.0 + w * w), 5.0, 25.0, weight="sin", wvar=t, epsabs=1e-14)
    assert fit.oscillatory_integral(t)[0] == pytest.approx(real - 1j * imag, abs=1e-8)


def test_continuation_integral_of_a_constant_is_exact():
    fit = fourier_continuation(np.ones(501), 5.0, 25.0)
    t = np.array([0.0, 3.0, 40.0])
    exact = np.array([20.0, *((np.exp(-1j * 25.0 * t[1:]) - np.exp(-1j * 5.0 * t[1:])) / (-1j * t[1:]))])
    np.testing.assert_allclose(fit.oscillatory_integral(t), exact, atol=1e-11)


def test_continuation_error_does_not_grow_with_time():
    fit = fourier_continuation(np.cos(3.0 * _band()), 5.0, 25.0)
    errors = [
        abs(fit.oscillatory_integral(t)[0] - _cosine_integral(3.0, t, 5.0, 25.0)) for t in (10.0, 1.0e3)
    ]
    assert errors[1] <= 10.0 * max(errors[0], 1e-12)


def test_band_weights_agree_with_the_continuation():
    omega = _band()
    samples = np.exp(-0.05 * (omega - 12.0) ** 2) * np.exp(6j * omega)
    t = np.array([0.0, 6.0, 33.0])
    fit = fourier_continuation(samples, 5.0, 25.0)
    np.testing.assert_allclose(band_weights(5.0, 25.0, 501, t) @ samples, fit.oscillatory_integral(t), atol=1e-12)


def test_band_integral_of_well_sampled_oscillatory_data():
    # ten samples per period at J = 501 on [5, 25]
    omega = _band()
    frequency = 12.0
    t = 4.0
    weights = band_weights(5.0, 25.0, 501, np.array([t]))
    value = (weights @ np.cos(frequency * omega))[0]
    assert value == pytest.approx(_cosine_integral(frequency, t, 5.0, 25.0), abs=1e-8)


def _reference_moments(order: int, beta: float) -> np.ndarray:
    x, w = legendre.leggauss(400)
    return (w * np.exp(1j * beta * x)) @ cheb.chebvander(x, order - 1)


@pytest.mark.parametrize("beta", [0.5, 7.0, 16.0, 40.0, 250.0])
def test_chebyshev_moments_on_both_branches(beta):
    np.testing.assert_allclose(chebyshev_moments(16, beta), _reference_moments(16, beta), atol=1e-11)
    np.testing.assert_allclose(chebyshev_moments(16, -beta), np.conj(_reference_moments(16, beta)), atol=1e-11)


def test_chebyshev_moments_at_zero_frequency():
    moments = chebyshev_moments(6, 0.0)
    np.testing.assert_allclose(moments, [2.0, 0.0, -2.0 / 3.0, 0.0, -2.0 / 15.0, 0.0])


@pytest.mark.parametrize("t", [0.5, 3.0, 200.0])
def test_graded_rule_integrates_constants(t):
    grid = FrequencyGrid()
    values = np.ones(len(grid.graded_nodes))
    exact = (1.0 - np.exp(-1j * grid.cutoff * t)) / (1j * t)
    assert fcc_graded_integral(values, grid, t) == pytest.approx(exact, abs=1e-12)


def test_recenter_sum_shifts_each_window():
    partition = TimeWindowPartition(8.0, 2)
    samples = build_time_samples(partition, dt=0.5)
    total = recenter_sum({1: np.ones(samples.size), 2: np.ones(samples.size)}, partition, samples)
    shift = 24
    np.testing.assert_allclose(total[:shift], 1.0)
    np.testing.assert_allclose(total[shift:], 2.0)
    with pytest.raises(TransformError):
        recenter_sum({}, partition, samples)


def test_graded_rule_handles_a_square_root_at_zero_frequency():
    grid = FrequencyGrid()
    t = 3.0
    real, _ = quad(lambda w: math.sqrt(w) * math.cos(w * t), 0.0, grid.cutoff, epsabs=1e-13, limit=200)
    imag, _ = quad(lambda w: -math.sqrt(w) * math.sin(w * t), 0.0, grid.cutoff, epsabs=1e-13, limit=200)
    value = fcc_graded_integral(np.sqrt(grid.graded_nodes), grid, t)
    assert value == pytest.approx(complex(real, imag), abs=1e-6)


def test_graded_rule_handles_a_logarithm_at_zero_frequency():
    grid = FrequencyGrid(cutoff=1.0, grading_count=8, grading_power=3.0)
    t = 10.0
    real, _ = quad(lambda w: math.cos(w * t), 0.0, 1.0, weight="alg-loga", wvar=(0.0, 0.0), epsabs=1e-14)
    imag, _ = quad(lambda w: -math.sin(w * t), 0.0, 1.0, weight="alg-loga", wvar=(0.0, 0.0), epsabs=1e-14)
    value = fcc_graded_integral(np.log(grid.graded_nodes), grid, t)
    assert value == pytest.approx(complex(real, imag), abs=1e-8)


def test_forward_then_inverse_recovers_a_modulated_gaussian():
    grid = FrequencyGrid()
    partition = TimeWindowPartition(8.0, 2)
    samples = build_time_samples(partition, dt=0.05)
    forward = SlowForwardTransform(grid, partition, samples)
    inverse = InverseTransform(grid, samples.times)
    t = samples.times
    trace = np.exp(-((t - 5.0) ** 2)) * np.cos(10.0 * (t - 5.0))
    result = recenter_sum({q: inverse.apply(forward.apply(trace, q)) for q in (1, 2)}, partition, samples)
    inside = (t >= 0.0) & (t <= partition.horizon)
    np.testing.assert_allclose(result[inside], trace[inside], atol=1e-8)
