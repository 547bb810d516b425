from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from fthms.errors import ParameterDomainError

PROVENANCE_EXACT = "exact-formula"


@dataclass(slots=True)
class ErrorReport:
    points: np.ndarray  # observation points, one row each
    time_range: Tuple[float, float]
    error: float  # ε = max_t |u_num − u_ref| over every point
    provenance: str  # exact-formula | reference:<config hash>
    per_point: List[float] = field(default_factory=list)
    per_generation: Dict[int, float] = field(default_factory=dict)  # M -> ε(M)

    def rows(self) -> List[Dict[str, float]]:
        """ε versus M as table rows; the final row repeats the headline error."""
        rows = [{"M": m, "error": e} for m, e in sorted(self.per_generation.items())]
        if not rows:
            rows.append({"M": 0, "error": self.error})
        return rows


def _range_mask(times: np.ndarray, time_range: Tuple[float, float]) -> np.ndarray:
    lo, hi = time_range
    if not hi >= lo:
        raise ParameterDomainError(f"Error metric needs a non-empty time range, got [{lo}, {hi}]")
    mask = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    if not np.any(mask):
        raise ParameterDomainError(f"Time range [{lo}, {hi}] holds no samples")
    return mask


def align_traces(times: np.ndarray, reference_times: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Reference values on ``times``; exact copy when the grids already agree."""
    times = np.asarray(times, dtype=float)
    reference_times = np.asarray(reference_times, dtype=float)
    reference = np.asarray(reference)
    if reference_times.shape == times.shape and np.allclose(reference_times, times, rtol=0.0, atol=1e-12):
        return reference
    if times.min() < reference_times.min() - 1e-12 or times.max() > reference_times.max() + 1e-12:
        raise ParameterDomainError("Reference trace does not cover the requested time range")
    index = np.searchsorted(reference_times, times - 1e-9)
    index = np.minimum(index, len(reference_times) - 1)
    if np.allclose(reference_times[index], times, rtol=0.0, atol=1e-9):
        return reference[index]
    return CubicSpline(reference_times, reference, axis=0)(times)


def error_metric(
    u_num: np.ndarray,
    u_ref: np.ndarray,
    times: np.ndarray,
    time_range: Tuple[float, float],
) -> float:
    """ε = max over the range (and over points) of |u_num − u_ref|; both traces sampled on ``times``."""
    times = np.asarray(times, dtype=float)
    u_num = np.asarray(u_num)
    u_ref = np.asarray(u_ref)
    if u_num.shape != u_ref.shape:
        raise ParameterDomainError(f"Traces differ in shape: {u_num.shape} vs {u_ref.shape}")
    if u_num.shape[0] != len(times):
        raise ParameterDomainError("Trace rows must match the time samples")
    mask = _range_mask(times, time_range)
    return float(np.max(np.abs(u_num[mask] - u_ref[mask])))


def error_report(
    points: np.ndarray,
    times: np.ndarray,
    numeric: np.ndarray,
    reference: np.ndarray,
    time_range: Tuple[float, float],
    provenance: str,
    history: Sequence[np.ndarray] = (),
) -> ErrorReport:
    """Headline ε, ε per observation point and, when ``history`` holds u_M after each M, ε(M)."""
    numeric = np.asarray(numeric).reshape(len(times), -1)
    reference = np.asarray(reference).reshape(len(times), -1)
    mask = _range_mask(np.asarray(times, dtype=float), time_range)
    per_point = np.max(np.abs(numeric[mask] - reference[mask]), axis=0)
    per_generation = {
        m: error_metric(np.asarray(u).reshape(reference.shape), reference, times, time_range)
        for m, u in enumerate(history, start=1)
    }
    return ErrorReport(
        points=np.asarray(points, dtype=float).reshape(-1, 2),
        time_range=(float(time_range[0]), float(time_range[1])),
        error=float(per_point.max(initial=0.0)),
        provenance=provenance,
        per_point=[float(v) for v in per_point],
        per_generation=per_generation,
    )
