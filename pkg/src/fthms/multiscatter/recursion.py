from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Set, Tuple

import numpy as np

from fthms.errors import DependencyError
from fthms.multiscatter.layout import PatchSystem
from fthms.multiscatter.models import GenerationData, SolutionAccumulator, SubSolution


def init_first_generation(system: PatchSystem, incident: Mapping[int, np.ndarray]) -> GenerationData:
    """g_{j,1} = −χ_j u^i on every patch."""
    data = {}
    for patch in system.patches:
        trace = np.asarray(incident[patch.index], dtype=float)
        data[patch.index] = -trace * patch.chi[None, :]
    return GenerationData(1, data)


def build_vtilde(system: PatchSystem, j: int, traces: Mapping[int, np.ndarray]) -> np.ndarray:
    """Σ_{k≠j} ṽ_{k,j,m} at the nodes of Γ_j.

    A neighbor's contribution is zeroed on the overlap it shares with Γ_j; other patches are
    summed unmasked.
    """
    total = None
    for k in range(system.count):
        if k == j:
            continue
        if k not in traces:
            raise DependencyError(f"Masked sum for patch {j} is missing the trace of patch {k}")
        trace = np.asarray(traces[k])
        if system.is_neighbor(j, k):
            keep = ~system.overlap_nodes(j, k)
            trace = trace * keep[None, :]
        total = trace.copy() if total is None else total + trace
    if total is None:
        return np.zeros((0, system.patches[j].size))
    return total


def next_generation_data(
    system: PatchSystem,
    generation: int,
    subs: Mapping[int, SubSolution],
    pruned: Set[Tuple[int, int]] | None = None,
) -> GenerationData:
    """g_{j,m+1} = −χ_j Σ_{k≠j} ṽ_{k,j,m}; pruned terms contribute nothing."""
    pruned = pruned or set()
    data = {}
    for patch in system.patches:
        j = patch.index
        traces: Dict[int, np.ndarray] = {}
        for k, sub in subs.items():
            if k == j:
                continue
            trace = sub.node_traces.get(j)
            if trace is None:
                raise DependencyError(f"Patch {k} produced no trace at the nodes of patch {j}")
            traces[k] = np.zeros_like(trace) if (k, generation) in pruned else trace
        if system.count == 1:
            data[j] = np.zeros_like(subs[j].self_trace)
            continue
        data[j] = -patch.chi[None, :] * build_vtilde(system, j, traces)
    return GenerationData(generation + 1, data)


def prune_converged(
    accumulator: SolutionAccumulator,
    subs: Iterable[SubSolution],
    tolerance: float,
    trailing: slice,
) -> List[Tuple[int, int, float]]:
    """Drop terms whose trailing-window magnitude is below ε^tol; returns (j, m, max) of the dropped."""
    dropped = []
    for sub in subs:
        magnitude = sub.max_magnitude(trailing)
        accumulator.term_magnitudes[(sub.patch, sub.generation)] = magnitude
        if tolerance > 0.0 and magnitude < tolerance:
            accumulator.pruned.add((sub.patch, sub.generation))
            dropped.append((sub.patch, sub.generation, magnitude))
    return dropped
