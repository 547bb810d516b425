from __future__ import annotations

from typing import Callable, Dict

import numpy as np
from scipy import special as sp

from fthms.errors import ParameterDomainError

_REAL_KINDS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "J0": sp.j0,
    "J1": sp.j1,
    "Y0": sp.y0,
    "Y1": sp.y1,
}


def bessel(kind: str, x: np.ndarray | float) -> np.ndarray:
    fn = _REAL_KINDS.get(kind)
    if fn is None:
        raise ParameterDomainError(f"Unknown Bessel kind '{kind}', expected one of {sorted(_REAL_KINDS)}")
    values = np.asarray(x, dtype=float)
    if kind.startswith("Y") and np.any(values <= 0.0):
        raise ParameterDomainError(f"{kind} needs x > 0, got min x = {float(values.min())}")
    if kind.startswith("J") and np.any(values < 0.0):
        raise ParameterDomainError(f"{kind} is evaluated for x ≥ 0 only, got min x = {float(values.min())}")
    return fn(values)


def hankel1(order: int, x: np.ndarray | float) -> np.ndarray:
    """H_n^{(1)}(x) = J_n(x) + iY_n(x) for real x > 0."""
    values = np.asarray(x, dtype=float)
    if np.any(values <= 0.0):
        raise ParameterDomainError(f"Hankel H{order} needs x > 0, got min x = {float(values.min())}")
    if order == 0:
        return sp.j0(values) + 1j * sp.y0(values)
    if order == 1:
        return sp.j1(values) + 1j * sp.y1(values)
    return sp.hankel1(order, values)
