from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

import numpy as np

from fthms.bie.linsolve import SolverSettings
from fthms.errors import ParameterDomainError
from fthms.ftransform.grid import FrequencyGrid, TimeSamples
from fthms.ftransform.partition import TimeWindowPartition

MODES = ("interior", "exterior-multi-obstacle", "exterior-open-arcs", "open-cavity")


@dataclass(slots=True)
class DiscretizationSettings:
    nodes_per_piece: int = 24
    max_piece_length: float = math.inf
    closed_half_count: int = 64  # whole closed components use 2n nodes
    near_factor: float = 1.0
    weighted_whole_arcs: bool = True


@dataclass(slots=True)
class RunPlan:
    mode: str
    generations: int  # M
    partition: TimeWindowPartition
    grid: FrequencyGrid
    samples: TimeSamples
    prune_tol: float = 0.0  # ε^tol
    c: float = 1.0
    observation_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    snapshot_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    snapshot_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    solver: SolverSettings = field(default_factory=SolverSettings)
    discretization: DiscretizationSettings = field(default_factory=DiscretizationSettings)
    workers: int = 1
    cache_operators: bool = False
    near_field_threshold: float = 1e-2

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ParameterDomainError(f"Unknown run mode '{self.mode}', expected one of {MODES}")
        if self.generations < 1:
            raise ParameterDomainError(f"Generation count M must be at least 1, got {self.generations}")
        if self.prune_tol < 0.0:
            raise ParameterDomainError(f"Pruning tolerance must be non-negative, got {self.prune_tol}")
        if self.c <= 0.0:
            raise ParameterDomainError(f"Wave speed must be positive, got {self.c}")
        self.observation_points = np.asarray(self.observation_points, dtype=float).reshape(-1, 2)
        self.snapshot_points = np.asarray(self.snapshot_points, dtype=float).reshape(-1, 2)
        self.snapshot_times = np.asarray(self.snapshot_times, dtype=float).reshape(-1)


def guarantee_time(generations: int, delta_min: float, c: float = 1.0) -> float:
    """T(M) = M·δ_min/c; infinite when the boundary is a single whole patch."""
    if c <= 0.0:
        raise ParameterDomainError(f"Wave speed must be positive, got {c}")
    if math.isinf(delta_min):
        return math.inf
    return generations * delta_min / c


@dataclass(slots=True)
class GenerationData:
    generation: int  # m
    data: Dict[int, np.ndarray]  # patch -> g_{j,m}, time along axis 0, patch nodes along axis 1

    def is_zero(self, j: int) -> bool:
        return not np.any(self.data[j])

    def max_magnitude(self) -> float:
        return max((float(np.max(np.abs(g))) for g in self.data.values() if g.size), default=0.0)


@dataclass(slots=True)
class SubSolution:
    patch: int
    generation: int
    node_traces: Dict[int, np.ndarray]  # receiving patch -> v_{j,m} at its nodes
    self_trace: np.ndarray  # v_{j,m} on Γ_j from the solved densities
    observation: np.ndarray  # time × observation points
    spectra: Dict[int, np.ndarray] = field(default_factory=dict)  # q -> densities, ω × unknowns
    iterations: List[int] = field(default_factory=list)
    skipped: bool = False

    def max_magnitude(self, rows: slice | None = None) -> float:
        rows = rows if rows is not None else slice(None)
        values = [np.max(np.abs(trace[rows])) for trace in self.node_traces.values() if trace.size]
        if self.observation.size:
            values.append(np.max(np.abs(self.observation[rows])))
        return float(max(values, default=0.0))


@dataclass(slots=True)
class SolutionAccumulator:
    """Running multiple-scattering sum u_M at observation points and on every patch node."""

    observation: np.ndarray
    boundary: Dict[int, np.ndarray]
    history: List[np.ndarray] = field(default_factory=list)  # u_m at observation points after each m
    term_magnitudes: Dict[Tuple[int, int], float] = field(default_factory=dict)
    pruned: Set[Tuple[int, int]] = field(default_factory=set)
    densities: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)  # (j, q) -> Σ_m ψ_{j,m,q}

    def add(self, sub: SubSolution) -> None:
        self.observation += sub.observation
        for receiver, trace in sub.node_traces.items():
            self.boundary[receiver] += trace
        self.boundary[sub.patch] += sub.self_trace
        for q, spectrum in sub.spectra.items():
            key = (sub.patch, q)
            if key in self.densities:
                self.densities[key] = self.densities[key] + spectrum
            else:
                self.densities[key] = spectrum.copy()

    def close_generation(self) -> None:
        self.history.append(self.observation.copy())


@dataclass(slots=True)
class GenerationStats:
    generation: int
    data_max: float
    field_max: float
    boundary_residual: float  # max |u_m + u^i| over nodes for t ≤ min(T(m), horizon)
    causality: float  # max |g_{j,m}| over t ≤ T(m − 1), relative to ‖u^i‖
    huygens: float  # max |v_{j,m}| off Γ_j for t ≤ T(m), relative to ‖u^i‖
    iterations: int
    seconds: float


@dataclass(slots=True)
class RunReport:
    mode: str
    generations: int
    delta_min: float
    guarantee_time: float
    horizon: float
    incident_max: float
    stats: List[GenerationStats] = field(default_factory=list)
    pruned: List[Tuple[int, int, float]] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"mode: {self.mode}",
            f"generations: {self.generations}",
            f"delta_min: {self.delta_min:.6g}",
            f"guarantee_time: {self.guarantee_time:.6g}",
            f"horizon: {self.horizon:.6g}",
            f"incident_max: {self.incident_max:.6g}",
            "",
            "m data_max field_max boundary_residual causality huygens iterations seconds",
        ]
        for s in self.stats:
            lines.append(
                f"{s.generation} {s.data_max:.3e} {s.field_max:.3e} {s.boundary_residual:.3e} "
                f"{s.causality:.3e} {s.huygens:.3e} {s.iterations} {s.seconds:.2f}"
            )
        lines.append("")
        lines.append(f"pruned terms: {len(self.pruned)}")
        for j, m, magnitude in self.pruned:
            lines.append(f"  v[{j},{m}] max={magnitude:.3e}")
        if self.timings:
            lines.append("")
            lines.extend(f"time.{stage}: {seconds:.2f}s" for stage, seconds in self.timings.items())
        return "\n".join(lines) + "\n"
