from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from fthms.errors import TransformError
from fthms.ftransform.continuation import band_weights
from fthms.ftransform.filon import graded_weights
from fthms.ftransform.grid import FrequencyGrid, TimeSamples
from fthms.ftransform.partition import TimeWindowPartition


class InverseTransform:
    """g(t) = (1/π) Re ∫_0^W G(ω) e^{−iωt} dω as one dense matrix over a fixed set of times.

    The node count is the same for every t; only the moment values depend on t.
    """

    def __init__(self, grid: FrequencyGrid, times: np.ndarray) -> None:
        self.grid = grid
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        matrix = np.zeros((len(self.times), grid.size), dtype=complex)
        matrix[:, grid.band_slice] = band_weights(
            grid.cutoff, grid.bandwidth, grid.count, self.times, grid.matching_points
        )
        if grid.low_frequency:
            matrix[:, grid.graded_slice] = graded_weights(grid, self.times)
        self.matrix = matrix

    @property
    def node_count(self) -> int:
        return self.matrix.shape[1]

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[0] != self.grid.size:
            raise TransformError(f"Spectrum has {values.shape[0]} samples, the frequency grid has {self.grid.size}")
        return np.real(self.matrix @ values) / np.pi


def inverse_ft(values: np.ndarray, grid: FrequencyGrid, t: np.ndarray | float) -> np.ndarray:
    result = InverseTransform(grid, np.atleast_1d(t)).apply(values)
    return result[0] if np.ndim(t) == 0 else result


def recenter_sum(
    traces: Mapping[int, np.ndarray] | Sequence[np.ndarray],
    partition: TimeWindowPartition,
    samples: TimeSamples,
) -> np.ndarray:
    """Σ_q g_q(t − s_q) on the global grid, each g_q given on that same grid as a function of t − s_q."""
    items = traces.items() if isinstance(traces, Mapping) else enumerate(traces, start=1)
    total = None
    for q, trace in sorted(items, key=lambda item: item[0]):
        trace = np.asarray(trace)
        if trace.shape[0] != samples.size:
            raise TransformError(f"Window {q} trace has {trace.shape[0]} samples, expected {samples.size}")
        if total is None:
            total = np.zeros_like(trace)
        shift = int(round(partition.center(q) / samples.dt))
        total[shift:] += trace[: samples.size - shift]
    if total is None:
        raise TransformError("recenter_sum needs at least one window trace")
    return total
