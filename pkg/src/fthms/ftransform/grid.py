from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from fthms.bie.quadrature import chebyshev_nodes, fejer_weights
from fthms.errors import ParameterDomainError, TransformError
from fthms.ftransform.partition import TimeWindowPartition

# Graded cells wider than this endpoint ratio are split geometrically.
MAX_CELL_RATIO = 4.0
# Exponent of the ω = μ1·u⁴ substitution on the innermost cell (0, μ1).
INNER_POWER = 4


@dataclass(frozen=True, slots=True)
class GradedCell:
    lo: float
    hi: float
    inner: bool = False  # (0, μ1): substituted Fejér rule instead of Filon

    @property
    def half(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def mid(self) -> float:
        return 0.5 * (self.hi + self.lo)


@dataclass(slots=True)
class FrequencyGrid:
    """Positive frequency nodes: graded cells on (0, w_c) followed by J equispaced nodes on [w_c, W].

    Negative frequencies are never stored; the ±ω conjugate symmetry of real signals covers them.
    """

    cutoff: float = 1.0  # w_c
    bandwidth: float = 25.0  # W
    count: int = 501  # J
    grading_count: int = 8  # P
    grading_power: float = 3.0  # p
    cc_order: int = 16
    low_frequency: bool = True
    matching_points: int = 25
    cells: List[GradedCell] = field(init=False)
    graded_nodes: np.ndarray = field(init=False)
    band_nodes: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.cutoff < self.bandwidth:
            raise ParameterDomainError(f"Frequency grid needs 0 < w_c < W, got ({self.cutoff}, {self.bandwidth})")
        if self.count < 2 * self.matching_points:
            raise TransformError(
                f"Fourier continuation needs J ≥ {2 * self.matching_points} samples, got {self.count}"
            )
        if self.grading_count < 1 or self.grading_power <= 0.0 or self.cc_order < 2:
            raise ParameterDomainError("Graded rule needs P ≥ 1, p > 0 and a CC order of at least 2")
        self.band_nodes = np.linspace(self.cutoff, self.bandwidth, self.count)
        self.cells = self._graded_cells() if self.low_frequency else []
        self.graded_nodes = np.concatenate([cell_nodes(c, self.cc_order) for c in self.cells]) if self.cells else np.zeros(0)

    def _graded_cells(self) -> List[GradedCell]:
        mu = self.cutoff * (np.arange(1, self.grading_count + 1) / self.grading_count) ** self.grading_power
        cells = [GradedCell(0.0, float(mu[0]), inner=True)]
        for lo, hi in zip(mu[:-1], mu[1:]):
            pieces = max(1, int(math.ceil(math.log(hi / lo) / math.log(MAX_CELL_RATIO))))
            edges = lo * (hi / lo) ** (np.arange(pieces + 1) / pieces)
            edges[-1] = hi
            cells.extend(GradedCell(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:]))
        return cells

    @property
    def graded_markers(self) -> np.ndarray:
        """μ_j = w_c (j/P)^p, j = 1..P."""
        return self.cutoff * (np.arange(1, self.grading_count + 1) / self.grading_count) ** self.grading_power

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([self.graded_nodes, self.band_nodes])

    @property
    def size(self) -> int:
        return len(self.graded_nodes) + len(self.band_nodes)

    @property
    def graded_slice(self) -> slice:
        return slice(0, len(self.graded_nodes))

    @property
    def band_slice(self) -> slice:
        return slice(len(self.graded_nodes), self.size)

    @property
    def spacing(self) -> float:
        return (self.bandwidth - self.cutoff) / (self.count - 1)


def cell_nodes(cell: GradedCell, order: int) -> np.ndarray:
    s = chebyshev_nodes(order)
    if cell.inner:
        u = 0.5 * (s + 1.0)
        return cell.hi * u**INNER_POWER
    return cell.mid + cell.half * s


def inner_cell_rule(cell: GradedCell, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on (0, μ1) after ω = μ1·u⁴; the weights absorb 4μ1u³."""
    s = chebyshev_nodes(order)
    u = 0.5 * (s + 1.0)
    weights = 0.5 * fejer_weights(order) * INNER_POWER * cell.hi * u ** (INNER_POWER - 1)
    return cell.hi * u**INNER_POWER, weights


@dataclass(frozen=True, slots=True)
class TimeSamples:
    """Uniform grid t_n = nΔt for n = −lead..count; the lead-in covers [−H, 0)."""

    dt: float
    lead: int
    count: int  # N_T

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(-self.lead, self.count + 1)

    @property
    def size(self) -> int:
        return self.lead + self.count + 1

    @property
    def zero_index(self) -> int:
        return self.lead

    @property
    def end(self) -> float:
        return self.count * self.dt

    def index_of(self, t: float) -> int:
        index = int(round(t / self.dt)) + self.lead
        if not 0 <= index < self.size:
            raise TransformError(f"Time {t} lies outside the grid [{-self.lead * self.dt}, {self.end}]")
        return index

    def nonnegative(self) -> slice:
        return slice(self.lead, self.size)


def build_time_samples(partition: TimeWindowPartition, dt: float | None = None, n_steps: int | None = None) -> TimeSamples:
    """Grid over [−H, s_Q + H] with Δt = (s_Q + H)/N_T and an even H/Δt, so every s_q falls on a node."""
    end = partition.end
    if n_steps is not None:
        if n_steps < 1:
            raise ParameterDomainError(f"n_steps must be positive, got {n_steps}")
        dt = end / n_steps
    if dt is None or dt <= 0.0:
        raise ParameterDomainError(f"Time step must be positive, got {dt}")
    lead = max(2, int(round(partition.half_width / dt)))
    lead += lead % 2
    step = partition.half_width / lead
    steps = int(round(end / step))
    return TimeSamples(step, lead, steps)
