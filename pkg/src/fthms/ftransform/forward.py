from __future__ import annotations

import numpy as np

from fthms.errors import TransformError
from fthms.ftransform.grid import FrequencyGrid, TimeSamples
from fthms.ftransform.partition import TimeWindowPartition, box_window


def slow_transform_matrix(omegas: np.ndarray, half_width: float, samples: int) -> np.ndarray:
    """Maps the periodic samples f(−H + kΔt), k < N, to ∫_{−H}^{H} f(t) e^{iωt} dt.

    The integrand is expanded as Σ_m c_m e^{iπm(t+H)/H} with c = fft(f)/N and each term is
    integrated exactly.
    """
    omegas = np.asarray(omegas, dtype=float)
    m = np.fft.fftfreq(samples, d=1.0 / samples)
    shifted = omegas[:, None] + np.pi * m[None, :] / half_width
    exact = np.where(m % 2 == 0, 1.0, -1.0)[None, :] * 2.0 * half_width * np.sinc(shifted * half_width / np.pi)
    return np.fft.fft(exact, axis=1) / samples


class SlowForwardTransform:
    """s_q-centered slow transforms of traces stored on a global TimeSamples grid."""

    def __init__(self, grid: FrequencyGrid, partition: TimeWindowPartition, samples: TimeSamples) -> None:
        self.grid = grid
        self.partition = partition
        self.samples = samples
        self.window_size = 2 * samples.lead
        tau = samples.dt * (np.arange(self.window_size) - samples.lead)
        self.window_values = box_window(tau, partition.half_width)
        self.matrix = slow_transform_matrix(grid.nodes, partition.half_width, self.window_size)

    def window_start(self, q: int) -> int:
        """Global index of τ = −H in window q."""
        return int(round(self.partition.center(q) / self.samples.dt))

    def window_samples(self, trace: np.ndarray, q: int) -> np.ndarray:
        """g(τ + s_q)⊓(τ) on the window grid; ``trace`` has time along axis 0."""
        trace = np.asarray(trace)
        if trace.shape[0] != self.samples.size:
            raise TransformError(f"Trace has {trace.shape[0]} samples, the time grid has {self.samples.size}")
        start = self.window_start(q)
        block = trace[start : start + self.window_size]
        shape = (self.window_size,) + (1,) * (trace.ndim - 1)
        return block * self.window_values.reshape(shape)

    def apply(self, trace: np.ndarray, q: int) -> np.ndarray:
        """G_{q,slow} at every grid node; frequency along axis 0."""
        return self.matrix @ self.window_samples(trace, q)


def slow_forward_ft(
    window_trace: np.ndarray, q: int, grid: FrequencyGrid, partition: TimeWindowPartition
) -> np.ndarray:
    """∫_{−H}^{H} g(t + s_q)⊓_q(t + s_q)e^{iωt} dt from samples of g(t + s_q) at t = −H + kΔt, k < N."""
    window_trace = np.asarray(window_trace)
    count = window_trace.shape[0]
    if count < 4 or count % 2:
        raise TransformError(f"Window trace needs an even sample count of at least 4, got {count}")
    partition.center(q)
    tau = 2.0 * partition.half_width * np.arange(count) / count - partition.half_width
    weights = box_window(tau, partition.half_width).reshape((count,) + (1,) * (window_trace.ndim - 1))
    return slow_transform_matrix(grid.nodes, partition.half_width, count) @ (window_trace * weights)
