from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List

import numpy as np

from fthms.errors import ParameterDomainError

DEFAULT_TOL = 1e-6
ONSET_FACTOR = 1e-2


@dataclass(slots=True)
class ProbeCheck:
    point: np.ndarray
    arrival: float  # t0 + chordal distance / c
    max_before: float  # max |field| for t < arrival
    threshold: float
    passed: bool

    @property
    def margin(self) -> float:
        """threshold / max_before; infinite when the probe is exactly silent."""
        if self.max_before == 0.0:
            return float("inf")
        return self.threshold / self.max_before


def chordal_distance(points: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest sample of the data support."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    support = np.atleast_2d(np.asarray(support, dtype=float))
    if not len(support):
        return np.full(len(points), np.inf)
    return np.min(np.linalg.norm(points[:, None, :] - support[None, :, :], axis=-1), axis=1)


def data_onset(times: np.ndarray, data: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """First time at which |data| exceeds tol·max|data| anywhere; +inf for zero data."""
    data = np.asarray(data).reshape(len(times), -1)
    peak = float(np.max(np.abs(data), initial=0.0))
    if peak == 0.0:
        return float("inf")
    active = np.any(np.abs(data) > tol * peak, axis=1)
    return float(np.asarray(times)[np.argmax(active)])


def huygens_check(
    times: np.ndarray,
    field: np.ndarray,
    probes: np.ndarray,
    support: np.ndarray,
    t0: float,
    c: float = 1.0,
    data_scale: float = 1.0,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> List[ProbeCheck]:
    """Silence of ``field`` (times × probes) before t0 + dist(probe, support)/c.

    ``support`` samples the boundary region carrying the data; chordal distance never exceeds
    the travel path, so the arrival bound is conservative.
    """
    if c <= 0.0:
        raise ParameterDomainError(f"Wave speed must be positive, got {c}")
    times = np.asarray(times, dtype=float)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    field = np.asarray(field).reshape(len(times), len(probes))
    arrivals = t0 + chordal_distance(probes, support) / c
    threshold = tol * data_scale

    def check(p: int) -> ProbeCheck:
        before = times < arrivals[p]
        worst = float(np.max(np.abs(field[before, p]), initial=0.0))
        return ProbeCheck(probes[p], float(arrivals[p]), worst, threshold, worst <= threshold)

    if workers <= 1 or len(probes) < 2:
        return [check(p) for p in range(len(probes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(check, range(len(probes))))


def observation_silence(result, tol: float = DEFAULT_TOL) -> List[ProbeCheck]:
    """Scattered field at the observation points of a run stays silent until the incident reaches Γ."""
    system = result.system
    support = np.vstack([p.points for p in system.patches])
    incident = np.hstack([result.incident_nodes[p.index] for p in system.patches])
    # Onset sits two decades below the silence threshold.
    t0 = data_onset(result.times, incident, tol * ONSET_FACTOR)
    scale = float(np.max(np.abs(incident), initial=0.0)) or 1.0
    return huygens_check(
        result.times,
        result.accumulator.observation,
        result.plan.observation_points,
        support,
        t0,
        result.plan.c,
        data_scale=scale,
        tol=tol,
        workers=result.plan.workers,
    )
