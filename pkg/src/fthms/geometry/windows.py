from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fthms.errors import ParameterDomainError


@dataclass(frozen=True, slots=True)
class WindowProfile:
    t0: float
    t1: float

    def __post_init__(self) -> None:
        if not 0.0 < self.t0 < self.t1:
            raise ParameterDomainError(f"Window thresholds need 0 < t0 < t1, got ({self.t0}, {self.t1})")


def eta(t: np.ndarray | float, t0: float, t1: float) -> np.ndarray:
    """C∞ bump: 1 on |t| ≤ t0, 0 on |t| ≥ t1, exp(2e^{-1/s}/(s-1)) in between."""
    values = np.asarray(t, dtype=float)
    s = np.atleast_1d((np.abs(values) - t0) / (t1 - t0))
    out = np.where(s <= 0.0, 1.0, 0.0)
    inside = (s > 0.0) & (s < 1.0)
    if np.any(inside):
        si = s[inside]
        out[inside] = np.exp(2.0 * np.exp(-1.0 / si) / (si - 1.0))
    return out.reshape(values.shape)


def eta_window(t: np.ndarray | float, profile: WindowProfile) -> np.ndarray:
    return eta(t, profile.t0, profile.t1)
